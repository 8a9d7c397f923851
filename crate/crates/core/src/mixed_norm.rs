//! Weighted iterated Lebesgue norms `L_(p;d)` and the sequence-space norms
//! built on top of them.
//!
//! A grid of dimension `d` is split into consecutive blocks of `d_1, ..., d_l`
//! axes. The mixed norm integrates block 1 first (innermost) and block `l`
//! last. Integrals are Riemann sums over lattice points with the true cell
//! measure; every sum is pairwise.
//!
//! Sequence norms put the weighted `l_q` aggregation over scales `n` at a
//! chosen position among the block integrations: position 0 gives
//! `L_p[l_q]` (Triebel-Lizorkin order), position `l` gives `l_q[L_p]` (Besov
//! order), anything in between mixes the two.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anisotropy::DecomposedAnisotropy;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, TorusGrid};
use crate::numeric::{max_of, pairwise_sum};

/// Number of lattice points per block.
pub fn block_sizes(grid: &TorusGrid, decomposition: &[usize]) -> Result<Vec<usize>> {
    let total: usize = decomposition.iter().sum();
    if total != grid.ndim() || decomposition.iter().any(|&d| d == 0) {
        return Err(Error::DimensionMismatch {
            expected: grid.ndim(),
            got: total,
        });
    }
    let mut out = Vec::with_capacity(decomposition.len());
    let mut axis = 0;
    for &d in decomposition {
        out.push(grid.dims()[axis..axis + d].iter().product());
        axis += d;
    }
    Ok(out)
}

/// Cell measure of each block.
pub fn block_cell_measures(grid: &TorusGrid, decomposition: &[usize]) -> Vec<f64> {
    let mut axis = 0;
    decomposition
        .iter()
        .map(|&d| {
            let m = (axis..axis + d).map(|j| grid.spacing(j)).product();
            axis += d;
            m
        })
        .collect()
}

/// Anisotropic power weight `w(x) = prod_j rho_{A_j}(x_j)^{gamma_j}` on the
/// centered fundamental domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightField {
    exponents: Vec<f64>,
    traces: Vec<f64>,
    inner: Vec<f64>,
    block_values: Vec<Vec<f64>>,
}

impl WeightField {
    /// Evaluates the weight block by block. The lattice point at the origin
    /// of a block uses the value at the midpoint of its cell.
    pub fn power(grid: &TorusGrid, va: &DecomposedAnisotropy, exponents: &[f64]) -> Result<Self> {
        if exponents.len() != va.num_blocks() {
            return Err(Error::DimensionMismatch {
                expected: va.num_blocks(),
                got: exponents.len(),
            });
        }
        let sizes = block_sizes(grid, va.decomposition())?;
        let mut block_values = Vec::with_capacity(sizes.len());
        for (j, &size) in sizes.iter().enumerate() {
            let axes = va.block_range(j);
            let sub_dims: Vec<usize> = grid.dims()[axes.clone()].to_vec();
            let sub = TorusGrid::new(&sub_dims, &grid.period()[axes.clone()])?;
            let block = va.block(j);
            let gamma = exponents[j];
            let vals: Result<Vec<f64>> = (0..size)
                .map(|i| {
                    let mut x = sub.centered_point(i);
                    if x.iter().all(|&v| v == 0.0) {
                        for (k, v) in x.iter_mut().enumerate() {
                            *v = 0.5 * sub.spacing(k);
                        }
                    }
                    Ok(block.quasi_norm(&x)?.powf(gamma))
                })
                .collect();
            block_values.push(vals?);
        }
        Ok(Self {
            exponents: exponents.to_vec(),
            traces: va.traces(),
            inner: vec![1.0; va.num_blocks()],
            block_values,
        })
    }

    /// Declares the inner exponents `r_j` used by admissibility checks.
    pub fn with_inner_exponents(mut self, r: &[f64]) -> Result<Self> {
        if r.len() != self.exponents.len() {
            return Err(Error::DimensionMismatch {
                expected: self.exponents.len(),
                got: r.len(),
            });
        }
        self.inner = r.to_vec();
        Ok(self)
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn inner_exponents(&self) -> &[f64] {
        &self.inner
    }

    pub fn block_values(&self, j: usize) -> &[f64] {
        &self.block_values[j]
    }

    /// Per-block flags `gamma_j in (-tr A_j, tr A_j (p_j / r_j - 1))`.
    pub fn admissibility(&self, p: &[f64], r: &[f64]) -> Vec<bool> {
        self.windows(p, r)
            .iter()
            .zip(&self.exponents)
            .map(|((lo, hi), g)| lo < g && g < hi)
            .collect()
    }

    fn windows(&self, p: &[f64], r: &[f64]) -> Vec<(f64, f64)> {
        self.traces
            .iter()
            .zip(p.iter().zip(r))
            .map(|(tr, (p, r))| (-tr, tr * (p / r - 1.0)))
            .collect()
    }

    /// Fails with the first block whose exponent leaves its window.
    pub fn check_admissible(&self, p: &[f64], r: &[f64]) -> Result<()> {
        if p.len() != self.exponents.len() || r.len() != self.exponents.len() {
            return Err(Error::DimensionMismatch {
                expected: self.exponents.len(),
                got: p.len().min(r.len()),
            });
        }
        for (block, ((lo, hi), &gamma)) in self.windows(p, r).into_iter().zip(&self.exponents).enumerate() {
            if !(lo < gamma && gamma < hi) {
                return Err(Error::InadmissibleWeight { block, gamma, lo, hi });
            }
        }
        Ok(())
    }

    /// Full weight field in row-major grid order.
    pub fn values(&self) -> Vec<f64> {
        let mut out = vec![1.0];
        for b in &self.block_values {
            out = out
                .iter()
                .flat_map(|a| b.iter().map(move |v| a * v))
                .collect();
        }
        out
    }
}

fn check_exponents(p: &[f64], blocks: usize) -> Result<()> {
    if p.len() != blocks {
        return Err(Error::DimensionMismatch {
            expected: blocks,
            got: p.len(),
        });
    }
    if p.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter(format!("exponents must be positive, got {p:?}")));
    }
    Ok(())
}

/// Integrates out the leading block of a field laid out as
/// `lead x rest` (row-major).
fn integrate_leading(values: &[f64], lead: usize, p: f64, cell: f64, weight: Option<&[f64]>) -> Vec<f64> {
    let rest = values.len() / lead;
    (0..rest)
        .into_par_iter()
        .map(|r| {
            let column = (0..lead).map(|i| values[i * rest + r]);
            if p.is_infinite() {
                let col: Vec<f64> = column.collect();
                return max_of(&col);
            }
            let powered: Vec<f64> = match weight {
                Some(w) => column.zip(w).map(|(v, w)| v.powf(p) * w).collect(),
                None => column.map(|v| v.powf(p)).collect(),
            };
            (pairwise_sum(&powered) * cell).powf(1.0 / p)
        })
        .collect()
}

struct Plan<'a> {
    sizes: Vec<usize>,
    cells: Vec<f64>,
    weight: Option<&'a WeightField>,
}

impl<'a> Plan<'a> {
    fn new(grid: &TorusGrid, decomposition: &[usize], p: &[f64], weight: Option<&'a WeightField>) -> Result<Self> {
        let sizes = block_sizes(grid, decomposition)?;
        check_exponents(p, sizes.len())?;
        if let Some(w) = weight {
            if w.block_values.len() != sizes.len()
                || w.block_values.iter().zip(&sizes).any(|(v, s)| v.len() != *s)
            {
                return Err(Error::InvalidParameter("weight does not match the grid blocks".into()));
            }
            w.check_admissible(p, &w.inner)?;
        }
        Ok(Self {
            sizes,
            cells: block_cell_measures(grid, decomposition),
            weight,
        })
    }

    fn integrate(&self, mut values: Vec<f64>, p: &[f64], blocks: std::ops::Range<usize>) -> Vec<f64> {
        for j in blocks {
            let w = self.weight.map(|w| w.block_values[j].as_slice());
            values = integrate_leading(&values, self.sizes[j], p[j], self.cells[j], w);
        }
        values
    }
}

/// `L_(p;d)` norm of a nonnegative field in row-major grid order.
pub fn mixed_lp_field(
    grid: &TorusGrid,
    field: &[f64],
    p: &[f64],
    decomposition: &[usize],
    weight: Option<&WeightField>,
) -> Result<f64> {
    if field.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: field.len(),
        });
    }
    let plan = Plan::new(grid, decomposition, p, weight)?;
    let out = plan.integrate(field.to_vec(), p, 0..p.len());
    Ok(out[0])
}

/// `L_(p;d)` norm of `|f|` (Euclidean modulus over channels).
pub fn mixed_lp(f: &GridFunction, p: &[f64], decomposition: &[usize], weight: Option<&WeightField>) -> Result<f64> {
    mixed_lp_field(f.grid(), &f.modulus(), p, decomposition, weight)
}

/// Pointwise `(sum_n (2^{ns} v_n)^q)^{1/q}` across equally long fields.
fn pointwise_lq(pieces: &[Vec<f64>], s: f64, q: f64) -> Vec<f64> {
    let len = pieces[0].len();
    let factors: Vec<f64> = (0..pieces.len()).map(|n| 2f64.powf(n as f64 * s)).collect();
    (0..len)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(pieces.len()),
            |terms: &mut Vec<f64>, i| {
                terms.clear();
                if q.is_infinite() {
                    terms.extend(pieces.iter().zip(&factors).map(|(p, f)| f * p[i]));
                    max_of(terms)
                } else {
                    terms.extend(pieces.iter().zip(&factors).map(|(p, f)| (f * p[i]).powf(q)));
                    pairwise_sum(terms).powf(1.0 / q)
                }
            },
        )
        .collect()
}

/// Sequence norm with the weighted `l_q^s` aggregation placed after the
/// first `position` block integrations.
///
/// `pieces[n]` is the modulus field of the `n`-th member.
#[allow(clippy::too_many_arguments)]
pub fn seq_norm_at(
    grid: &TorusGrid,
    pieces: &[Vec<f64>],
    s: f64,
    p: &[f64],
    q: f64,
    position: usize,
    decomposition: &[usize],
    weight: Option<&WeightField>,
) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
    }
    if pieces.is_empty() {
        return Ok(0.0);
    }
    if let Some(bad) = pieces.iter().find(|v| v.len() != grid.len()) {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: bad.len(),
        });
    }
    let plan = Plan::new(grid, decomposition, p, weight)?;
    if position > p.len() {
        return Err(Error::InvalidParameter(format!(
            "aggregation position {position} exceeds {} blocks",
            p.len()
        )));
    }
    let partial: Vec<Vec<f64>> = pieces
        .iter()
        .map(|v| plan.integrate(v.clone(), p, 0..position))
        .collect();
    let combined = pointwise_lq(&partial, s, q);
    let out = plan.integrate(combined, p, position..p.len());
    Ok(out[0])
}

/// `L_p[l_q^s]`: pointwise weighted `l_q` over scales, then the mixed norm.
pub fn seq_norm_f(
    grid: &TorusGrid,
    pieces: &[Vec<f64>],
    s: f64,
    p: &[f64],
    q: f64,
    decomposition: &[usize],
    weight: Option<&WeightField>,
) -> Result<f64> {
    seq_norm_at(grid, pieces, s, p, q, 0, decomposition, weight)
}

/// `l_q^s[L_p]`: the mixed norm of every member, then weighted `l_q`.
pub fn seq_norm_b(
    grid: &TorusGrid,
    pieces: &[Vec<f64>],
    s: f64,
    p: &[f64],
    q: f64,
    decomposition: &[usize],
    weight: Option<&WeightField>,
) -> Result<f64> {
    seq_norm_at(grid, pieces, s, p, q, decomposition.len(), decomposition, weight)
}

/// Lattice-valued norm `L_q(outer)[L_p(inner)[l_r^s]]`.
///
/// The first `p_inner.len()` blocks of `decomposition` are inner; every
/// remaining block is outer and integrated with exponent `q_outer`.
#[allow(clippy::too_many_arguments)]
pub fn seq_norm_script_f(
    grid: &TorusGrid,
    pieces: &[Vec<f64>],
    s: f64,
    q_outer: f64,
    r: f64,
    p_inner: &[f64],
    decomposition: &[usize],
    weight: Option<&WeightField>,
) -> Result<f64> {
    let exps = inner_outer_exponents(p_inner, q_outer, decomposition)?;
    seq_norm_at(grid, pieces, s, &exps, r, 0, decomposition, weight)
}

/// Order-exchanged partner of [`seq_norm_script_f`]:
/// `L_q(outer)[l_r^s[L_p(inner)]]`. Equal to it when `r` equals every inner
/// exponent.
#[allow(clippy::too_many_arguments)]
pub fn seq_norm_script_f_exchanged(
    grid: &TorusGrid,
    pieces: &[Vec<f64>],
    s: f64,
    q_outer: f64,
    r: f64,
    p_inner: &[f64],
    decomposition: &[usize],
    weight: Option<&WeightField>,
) -> Result<f64> {
    let exps = inner_outer_exponents(p_inner, q_outer, decomposition)?;
    seq_norm_at(grid, pieces, s, &exps, r, p_inner.len(), decomposition, weight)
}

/// `p_inner` followed by `q_outer` for every remaining block.
pub fn inner_outer_exponents(p_inner: &[f64], q_outer: f64, decomposition: &[usize]) -> Result<Vec<f64>> {
    if p_inner.is_empty() || p_inner.len() >= decomposition.len() {
        return Err(Error::InvalidParameter(format!(
            "inner/outer split needs 1..{} inner blocks, got {}",
            decomposition.len(),
            p_inner.len()
        )));
    }
    let mut exps = p_inner.to_vec();
    exps.resize(decomposition.len(), q_outer);
    Ok(exps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::Anisotropy;
    use crate::grid::random_bandlimited;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        crate::numeric::rel_diff(a, b)
    }

    /// Reference mixed norm for two 1-d blocks with plain loops.
    fn oracle_2d(field: &[f64], n0: usize, n1: usize, h0: f64, h1: f64, p0: f64, p1: f64) -> f64 {
        let mut outer = 0.0;
        for i1 in 0..n1 {
            let mut inner = 0.0;
            for i0 in 0..n0 {
                inner += field[i0 * n1 + i1].powf(p0) * h0;
            }
            outer += inner.powf(1.0 / p0).powf(p1) * h1;
        }
        outer.powf(1.0 / p1)
    }

    #[test]
    fn constant_one_on_unit_torus() {
        let g = TorusGrid::unit(&[16, 8]).unwrap();
        let one = GridFunction::constant(g, Complex64::new(1.0, 0.0));
        for p in [[1.0, 2.0], [0.5, 3.0], [f64::INFINITY, 1.5]] {
            assert!((mixed_lp(&one, &p, &[1, 1], None).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn separable_function_factorizes() {
        let g = TorusGrid::new(&[32, 16], &[1.0, 2.0]).unwrap();
        let gx = |x: f64| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * x).sin();
        let hy = |y: f64| (y - 1.0).abs() + 0.1;
        let f = GridFunction::from_fn(g.clone(), |x| Complex64::new(gx(x[0]) * hy(x[1]), 0.0));
        let (p0, p1) = (3.0, 1.5);
        let ng = ((0..32).map(|i| gx(i as f64 / 32.0).powf(p0)).sum::<f64>() / 32.0).powf(1.0 / p0);
        let nh = ((0..16).map(|i| hy(i as f64 / 8.0).powf(p1)).sum::<f64>() / 8.0).powf(1.0 / p1);
        let got = mixed_lp(&f, &[p0, p1], &[1, 1], None).unwrap();
        assert!(rel(got, ng * nh) < 1e-13);
        let direct = oracle_2d(&f.modulus(), 32, 16, 1.0 / 32.0, 1.0 / 8.0, p0, p1);
        assert!(rel(got, direct) < 1e-13);
    }

    #[test]
    fn equal_exponents_give_plain_norm() {
        let g = TorusGrid::unit(&[16, 16]).unwrap();
        let f = random_bandlimited(&g, 4, |_, _| true, 1, false).unwrap();
        let mixed = mixed_lp(&f, &[2.0, 2.0], &[1, 1], None).unwrap();
        let single = mixed_lp(&f, &[2.0], &[2], None).unwrap();
        assert!(rel(mixed, single) < 1e-14);
        assert!(rel(mixed, f.energy().sqrt()) < 1e-14);
    }

    #[test]
    fn sequence_norm_examples() {
        let g = TorusGrid::unit(&[8, 8]).unwrap();
        let d = [1, 1];
        let f0: Vec<f64> = (0..64).map(|i| (i % 5) as f64).collect();
        let zero = vec![0.0; 64];
        let single_f = seq_norm_f(&g, &[f0.clone(), zero.clone()], 1.0, &[2.0, 3.0], 2.0, &d, None).unwrap();
        let plain = mixed_lp_field(&g, &f0, &[2.0, 3.0], &d, None).unwrap();
        assert!(rel(single_f, plain) < 1e-14);

        let c = [1.0, 0.5, 3.0];
        let consts: Vec<Vec<f64>> = c.iter().map(|&v| vec![v; 64]).collect();
        let s = 0.7;
        let q = 1.5;
        let want = c
            .iter()
            .enumerate()
            .map(|(n, v)| (2f64.powf(n as f64 * s) * v).powf(q))
            .sum::<f64>()
            .powf(1.0 / q);
        let f = seq_norm_f(&g, &consts, s, &[2.0, 4.0], q, &d, None).unwrap();
        let b = seq_norm_b(&g, &consts, s, &[2.0, 4.0], q, &d, None).unwrap();
        assert!(rel(f, want) < 1e-14 && rel(b, want) < 1e-14);

        let decaying: Vec<Vec<f64>> = (0..4).map(|n| vec![2f64.powi(-n); 64]).collect();
        let sup = seq_norm_f(&g, &decaying, 1.0, &[2.0, 2.0], f64::INFINITY, &d, None).unwrap();
        assert!((sup - 1.0).abs() < 1e-15);

        let two = vec![vec![1.0; 64], vec![1.0; 64]];
        let b2 = seq_norm_b(&g, &two, 1.0, &[2.0, 2.0], 2.0, &d, None).unwrap();
        assert!((b2 - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn fubini_exchanges() {
        let g = TorusGrid::new(&[16, 32], &[1.0, 3.0]).unwrap();
        let d = [1, 1];
        let pieces: Vec<Vec<f64>> = (0..4u64)
            .map(|n| random_bandlimited(&g, n, |_, _| true, 1, false).unwrap().modulus())
            .collect();
        let f = seq_norm_f(&g, &pieces, 0.5, &[2.5, 2.5], 2.5, &d, None).unwrap();
        let b = seq_norm_b(&g, &pieces, 0.5, &[2.5, 2.5], 2.5, &d, None).unwrap();
        assert!(rel(f, b) < 1e-12);
        let sf = seq_norm_script_f(&g, &pieces, 0.5, 1.5, 3.0, &[3.0], &d, None).unwrap();
        let ex = seq_norm_script_f_exchanged(&g, &pieces, 0.5, 1.5, 3.0, &[3.0], &d, None).unwrap();
        assert!(rel(sf, ex) < 1e-12);
        let all = seq_norm_script_f(&g, &pieces, 0.5, 2.0, 2.0, &[2.0], &d, None).unwrap();
        let tl = seq_norm_f(&g, &pieces, 0.5, &[2.0, 2.0], 2.0, &d, None).unwrap();
        assert!(rel(all, tl) < 1e-12);
        assert!(seq_norm_script_f(&g, &pieces, 0.5, 2.0, 2.0, &[2.0, 2.0], &d, None).is_err());
    }

    #[test]
    fn weight_window_and_values() {
        let g = TorusGrid::unit(&[8, 8]).unwrap();
        let va = DecomposedAnisotropy::new(vec![
            Anisotropy::diagonal(&[1.0]).unwrap(),
            Anisotropy::diagonal(&[2.0]).unwrap(),
        ])
        .unwrap();
        let w = WeightField::power(&g, &va, &[0.5, -1.0]).unwrap();
        assert_eq!(w.admissibility(&[2.0, 2.0], &[1.0, 1.0]), vec![true, true]);
        assert!(w.check_admissible(&[2.0, 2.0], &[1.0, 1.0]).is_ok());
        // tr A_2 (p/r - 1) = 2 (1.2 - 1) = 0.4 still admits -1; the lower edge is -2.
        let strong = WeightField::power(&g, &va, &[0.5, -2.0]).unwrap();
        assert!(matches!(
            strong.check_admissible(&[2.0, 2.0], &[1.0, 1.0]),
            Err(Error::InadmissibleWeight { block: 1, .. })
        ));
        let one = GridFunction::constant(g.clone(), Complex64::new(1.0, 0.0));
        assert!(mixed_lp(&one, &[2.0, 2.0], &[1, 1], Some(&strong)).is_err());
        // Origin cell uses the midpoint value rho(1/16)^{0.5}.
        assert!((w.block_values(0)[0] - (1.0f64 / 16.0).powf(0.5)).abs() < 1e-15);
        // x = -1/2 on block 1.
        assert!((w.block_values(0)[4] - 0.5f64.powf(0.5)).abs() < 1e-15);
        assert!((w.block_values(1)[2] - (0.25f64).powf(0.5).powf(-1.0)).abs() < 1e-14);
        let full = w.values();
        assert!((full[g.flat_index(&[4, 2])] - w.block_values(0)[4] * w.block_values(1)[2]).abs() < 1e-15);

        // Weighted norm of 1 equals the product of block weight integrals.
        let got = mixed_lp(&one, &[2.0, 3.0], &[1, 1], Some(&w)).unwrap();
        let i0 = (w.block_values(0).iter().sum::<f64>() / 8.0).powf(0.5);
        let i1 = (w.block_values(1).iter().sum::<f64>() / 8.0).powf(1.0 / 3.0);
        assert!(rel(got, i0 * i1) < 1e-14);
    }

    #[test]
    fn lattice_property_and_homogeneity() {
        let g = TorusGrid::unit(&[16, 16]).unwrap();
        let f = random_bandlimited(&g, 1, |_, _| true, 1, false).unwrap();
        let m = f.modulus();
        let bigger: Vec<f64> = m.iter().map(|v| v * 1.1 + 0.01).collect();
        for p in [[0.7, 2.0], [2.0, f64::INFINITY], [1.0, 1.0]] {
            let a = mixed_lp_field(&g, &m, &p, &[1, 1], None).unwrap();
            let b = mixed_lp_field(&g, &bigger, &p, &[1, 1], None).unwrap();
            assert!(a <= b);
            let scaled = mixed_lp(&f.scale(Complex64::new(0.0, -3.0)), &p, &[1, 1], None).unwrap();
            assert!(rel(scaled, 3.0 * a) < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn larger_q_never_increases(seed in 0u64..10_000, q1 in 0.5f64..4.0, dq in 0.0f64..4.0) {
            let g = TorusGrid::unit(&[8, 8]).unwrap();
            let pieces: Vec<Vec<f64>> = (0..3u64)
                .map(|n| random_bandlimited(&g, seed * 7 + n, |_, _| true, 1, false).unwrap().modulus())
                .collect();
            let q2 = q1 + dq;
            let a = pointwise_lq(&pieces, 0.3, q1);
            let b = pointwise_lq(&pieces, 0.3, q2);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(y <= &(x * (1.0 + 1e-14)));
            }
            let fa = seq_norm_f(&g, &pieces, 0.3, &[2.0, 2.0], q1, &[1, 1], None).unwrap();
            let fb = seq_norm_f(&g, &pieces, 0.3, &[2.0, 2.0], q2, &[1, 1], None).unwrap();
            prop_assert!(fb <= fa * (1.0 + 1e-14));
        }

        #[test]
        fn kappa_triangle(seed in 0u64..10_000, p in 0.5f64..3.0, q in 0.5f64..3.0) {
            let g = TorusGrid::unit(&[8, 8]).unwrap();
            let mk = |s: u64| -> Vec<GridFunction> {
                (0..2u64).map(|n| random_bandlimited(&g, s * 3 + n, |_, _| true, 1, false).unwrap()).collect()
            };
            let (f, h) = (mk(2 * seed), mk(2 * seed + 1));
            let sum: Vec<Vec<f64>> = f.iter().zip(&h).map(|(a, b)| a.add(b).unwrap().modulus()).collect();
            let fm: Vec<Vec<f64>> = f.iter().map(|a| a.modulus()).collect();
            let hm: Vec<Vec<f64>> = h.iter().map(|a| a.modulus()).collect();
            let kappa = 1f64.min(p).min(q);
            let n = |x: &[Vec<f64>]| seq_norm_f(&g, x, 0.5, &[p, p], q, &[1, 1], None).unwrap();
            let lhs = n(&sum).powf(kappa);
            let rhs = n(&fm).powf(kappa) + n(&hm).powf(kappa);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
