//! Iterated Hardy-Littlewood and Peetre maximal functions on the lattice.

use rayon::prelude::*;

use crate::anisotropy::{Anisotropy, DecomposedAnisotropy};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, TorusGrid};

/// Index bookkeeping for the sub-grid spanned by one block of axes.
struct BlockView {
    /// Product of dims before, inside and after the block.
    outer: usize,
    size: usize,
    inner: usize,
    dims: Vec<usize>,
    /// Offsets as signed steps, with their block quasi-norms.
    offsets: Vec<Vec<i64>>,
    rho: Vec<f64>,
}

impl BlockView {
    fn new(grid: &TorusGrid, block: &Anisotropy, axes: std::ops::Range<usize>) -> Result<Self> {
        let dims = grid.dims()[axes.clone()].to_vec();
        let sub = TorusGrid::new(&dims, &grid.period()[axes.clone()])?;
        let mut offsets = Vec::with_capacity(sub.len());
        let mut rho = Vec::with_capacity(sub.len());
        for i in 0..sub.len() {
            offsets.push(
                sub.multi_index(i)
                    .iter()
                    .enumerate()
                    .map(|(a, &ix)| sub.frequency_index(a, ix))
                    .collect(),
            );
            rho.push(block.quasi_norm(&sub.centered_point(i))?);
        }
        Ok(Self {
            outer: grid.dims()[..axes.start].iter().product(),
            size: sub.len(),
            inner: grid.dims()[axes.end..].iter().product(),
            dims,
            offsets,
            rho,
        })
    }

    /// Position inside the block after moving `b` by `offset`.
    fn moved(&self, b: &[usize], offset: &[i64]) -> usize {
        let mut out = 0usize;
        for a in 0..self.dims.len() {
            let n = self.dims[a] as i64;
            out = out * self.dims[a] + (b[a] as i64 + offset[a]).rem_euclid(n) as usize;
        }
        out
    }

    fn unflatten(&self, mut b: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for a in (0..self.dims.len()).rev() {
            idx[a] = b % self.dims[a];
            b /= self.dims[a];
        }
        idx
    }

    /// Applies `op(values along the block line, b)` to every line; `op`
    /// returns the new value at block position `b`.
    fn map_lines(&self, field: &[f64], op: impl Fn(&[f64], usize) -> f64 + Sync) -> Vec<f64> {
        let mut out = vec![0.0; field.len()];
        out.par_chunks_mut(self.size * self.inner)
            .enumerate()
            .for_each(|(o, chunk)| {
                let base = o * self.size * self.inner;
                for c in 0..self.inner {
                    let line: Vec<f64> = (0..self.size).map(|b| field[base + b * self.inner + c]).collect();
                    for b in 0..self.size {
                        chunk[b * self.inner + c] = op(&line, b);
                    }
                }
            });
        debug_assert_eq!(self.outer * self.size * self.inner, field.len());
        out
    }
}

fn check_exponents(va: &DecomposedAnisotropy, r: &[f64]) -> Result<()> {
    if r.len() != va.num_blocks() {
        return Err(Error::DimensionMismatch {
            expected: va.num_blocks(),
            got: r.len(),
        });
    }
    if r.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!("maximal exponents must be positive and finite, got {r:?}")));
    }
    Ok(())
}

/// `M_{r,1}( ... M_{r,l} g)`: per block, the supremum over balls
/// `B^{A_j}(x_j, delta)` of `(mean |g|^{r_j})^{1/r_j}`, innermost block
/// applied last. Radii run over `0` (the point itself) and the powers of two
/// from the smallest one holding a lattice neighbour until the ball covers
/// the whole block, so refining the grid only adds radii.
pub fn maximal_field(grid: &TorusGrid, field: &[f64], va: &DecomposedAnisotropy, r: &[f64]) -> Result<Vec<f64>> {
    check_exponents(va, r)?;
    if va.dim() != grid.ndim() {
        return Err(Error::DimensionMismatch {
            expected: grid.ndim(),
            got: va.dim(),
        });
    }
    let mut g = field.to_vec();
    for j in (0..va.num_blocks()).rev() {
        let view = BlockView::new(grid, va.block(j), va.block_range(j))?;
        let mut order: Vec<usize> = (0..view.size).collect();
        order.sort_by(|&a, &b| view.rho[a].total_cmp(&view.rho[b]));
        let rho_max = view.rho[order[view.size - 1]];
        let rho_min = order.iter().map(|&i| view.rho[i]).find(|&v| v > 0.0).unwrap_or(0.0);
        // Number of sorted offsets inside each radius 2^k, from the first
        // power of two reaching a lattice neighbour up to the whole block.
        let mut cuts = Vec::new();
        if rho_min > 0.0 {
            let mut delta = 2f64.powi((rho_min * (1.0 - 1e-12)).log2().ceil() as i32);
            loop {
                let count = order.partition_point(|&i| view.rho[i] <= delta * (1.0 + 1e-12));
                if cuts.last() != Some(&count) {
                    cuts.push(count);
                }
                if count == view.size || delta > 2.0 * rho_max {
                    break;
                }
                delta *= 2.0;
            }
        }
        let rj = r[j];
        let positions: Vec<Vec<usize>> = (0..view.size).map(|b| view.unflatten(b)).collect();
        g = view.map_lines(&g, |line, b| {
            let center = line[b].powf(rj);
            let mut best = center;
            let mut acc = 0.0;
            let mut k = 0;
            for &count in &cuts {
                while k < count {
                    let t = view.moved(&positions[b], &view.offsets[order[k]]);
                    acc += line[t].powf(rj) - center;
                    k += 1;
                }
                best = best.max(center + acc / count as f64);
            }
            best.powf(1.0 / rj)
        });
    }
    Ok(g)
}

/// Iterated maximal function of `|f|`.
pub fn maximal(f: &GridFunction, va: &DecomposedAnisotropy, r: &[f64]) -> Result<Vec<f64>> {
    maximal_field(f.grid(), &f.modulus(), va, r)
}

/// Peetre maximal function
/// `sup_y |f(x - y)| / prod_j (1 + R_j rho_{A_j}(y_j))^{tr(A_j)/r_j}`,
/// taken over lattice vectors. Requires the spectrum of `f` to lie in
/// `prod_j B^{A_j}(0, R_j)`.
pub fn peetre_maximal(f: &GridFunction, va: &DecomposedAnisotropy, r: &[f64], radii: &[f64]) -> Result<Vec<f64>> {
    check_exponents(va, r)?;
    if radii.len() != va.num_blocks() {
        return Err(Error::DimensionMismatch {
            expected: va.num_blocks(),
            got: radii.len(),
        });
    }
    if radii.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!("Peetre radii must be positive, got {radii:?}")));
    }
    let grid = f.grid();
    if va.dim() != grid.ndim() {
        return Err(Error::DimensionMismatch {
            expected: grid.ndim(),
            got: va.dim(),
        });
    }
    check_spectral_support(f, va, radii)?;
    let mut g = f.modulus();
    for j in 0..va.num_blocks() {
        let view = BlockView::new(grid, va.block(j), va.block_range(j))?;
        let power = va.block(j).trace() / r[j];
        let damp: Vec<f64> = view.rho.iter().map(|&p| (1.0 + radii[j] * p).powf(power)).collect();
        let positions: Vec<Vec<usize>> = (0..view.size).map(|b| view.unflatten(b)).collect();
        let negated: Vec<Vec<i64>> = view.offsets.iter().map(|o| o.iter().map(|v| -v).collect()).collect();
        g = view.map_lines(&g, |line, b| {
            let mut best = line[b];
            for (o, neg) in negated.iter().enumerate() {
                let t = view.moved(&positions[b], neg);
                best = best.max(line[t] / damp[o]);
            }
            best
        });
    }
    Ok(g)
}

fn check_spectral_support(f: &GridFunction, va: &DecomposedAnisotropy, radii: &[f64]) -> Result<()> {
    let grid = f.grid();
    let n = grid.len();
    let spec = f.spectrum();
    let scale = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for i in 0..n {
        let mag = (0..f.channels()).map(|c| spec[c * n + i].norm()).fold(0.0, f64::max);
        if mag <= 1e-12 * scale {
            continue;
        }
        let xi = grid.frequency(i);
        let rho = va.block_quasi_norms(&xi)?;
        for (j, (&p, &bound)) in rho.iter().zip(radii).enumerate() {
            if p > bound * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "spectrum leaves the Peetre band in block {j}: rho = {p}, radius = {bound}"
                )));
            }
        }
    }
    Ok(())
}
