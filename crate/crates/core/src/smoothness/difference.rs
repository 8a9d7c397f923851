//! Finite differences, difference fields over anisotropic balls and the
//! difference-norm right-hand side.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anisotropy::{Anisotropy, DecomposedAnisotropy};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, TorusGrid};
use crate::mixed_norm::{self, WeightField};
use crate::numeric::{max_of, pairwise_sum};
use crate::spaces::{SpaceKind, SpaceSpec};

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Lattice steps of `h`, if every coordinate is an integer number of
/// sample spacings.
pub fn lattice_steps(grid: &TorusGrid, h: &[f64]) -> Option<Vec<i64>> {
    h.iter()
        .enumerate()
        .map(|(j, &v)| {
            let s = v / grid.spacing(j);
            let r = s.round();
            ((s - r).abs() <= 1e-9 * r.abs().max(1.0)).then_some(r as i64)
        })
        .collect()
}

/// `Delta_h^M f = sum_j (-1)^j C(M, j) f(. + (M - j) h)` for a lattice vector
/// given in sample steps.
pub fn difference_lattice(f: &GridFunction, steps: &[i64], order: usize) -> Result<GridFunction> {
    let grid = f.grid();
    if steps.len() != grid.ndim() {
        return Err(Error::DimensionMismatch {
            expected: grid.ndim(),
            got: steps.len(),
        });
    }
    let n = grid.len();
    let ch = f.channels();
    let dims = grid.dims();
    let strides = grid.strides();
    let mut out = vec![Complex64::new(0.0, 0.0); n * ch];
    for j in 0..=order {
        let coef = binomial(order, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
        let mult = (order - j) as i64;
        let shift: Vec<i64> = steps.iter().map(|s| s * mult).collect();
        for i in 0..n {
            let mut src = 0usize;
            let mut rem = i;
            for a in 0..dims.len() {
                let idx = rem / strides[a];
                rem %= strides[a];
                src += ((idx as i64 + shift[a]).rem_euclid(dims[a] as i64) as usize) * strides[a];
            }
            for c in 0..ch {
                out[c * n + i] += f.samples()[c * n + src] * coef;
            }
        }
    }
    GridFunction::new(grid.clone(), ch, out)
}

/// `Delta_h^M f` through the spectral multiplier `(exp(i xi . h) - 1)^M`;
/// exact for any real `h`.
pub fn difference_spectral(f: &GridFunction, h: &[f64], order: usize) -> Result<GridFunction> {
    let grid = f.grid();
    if h.len() != grid.ndim() {
        return Err(Error::DimensionMismatch {
            expected: grid.ndim(),
            got: h.len(),
        });
    }
    // exp(i xi . h) factors over axes.
    let tables: Vec<Vec<Complex64>> = (0..grid.ndim())
        .map(|a| {
            (0..grid.dims()[a])
                .map(|i| {
                    let xi = grid.frequency_step(a) * grid.frequency_index(a, i) as f64;
                    Complex64::from_polar(1.0, xi * h[a])
                })
                .collect()
        })
        .collect();
    let dims = grid.dims();
    let strides = grid.strides();
    Ok(f.map_spectrum(|i| {
        let mut e = Complex64::new(1.0, 0.0);
        for a in 0..dims.len() {
            e *= tables[a][(i / strides[a]) % dims[a]];
        }
        (e - 1.0).powu(order as u32)
    }))
}

/// `Delta_h^M f`: lattice shifts when `h` is a lattice vector, otherwise the
/// spectral shift.
pub fn difference(f: &GridFunction, h: &[f64], order: usize) -> Result<GridFunction> {
    match lattice_steps(f.grid(), h) {
        Some(steps) => difference_lattice(f, &steps, order),
        None => difference_spectral(f, h, order),
    }
}

/// `Delta_h` applied `M` times in succession.
pub fn difference_iterated(f: &GridFunction, h: &[f64], order: usize) -> Result<GridFunction> {
    let mut g = f.clone();
    for _ in 0..order {
        g = difference(&g, h, 1)?;
    }
    Ok(g)
}

/// Shape of the `h`-balls at scale `n`.
#[derive(Debug, Clone)]
pub enum BallShape {
    /// Euclidean balls `B(0, 2^{-n a_j})` in each block.
    Product { a: Vec<f64>, decomposition: Vec<usize> },
    /// Quasi-norm balls `B^{A_j}(0, 2^{-n})` in each block.
    QuasiNorm(DecomposedAnisotropy),
}

impl BallShape {
    /// The anisotropy whose quasi-norm balls realize the shape.
    pub fn anisotropy(&self) -> Result<DecomposedAnisotropy> {
        match self {
            BallShape::Product { a, decomposition } => {
                if a.len() != decomposition.len() {
                    return Err(Error::DimensionMismatch {
                        expected: decomposition.len(),
                        got: a.len(),
                    });
                }
                DecomposedAnisotropy::new(
                    a.iter()
                        .zip(decomposition)
                        .map(|(&aj, &dj)| Anisotropy::diagonal(&vec![aj; dj]))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            BallShape::QuasiNorm(va) => Ok(va.clone()),
        }
    }
}

/// How the `h`-integral is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum HSampling {
    /// Lattice vectors inside the ball, exact shifts. Scales whose ball holds
    /// fewer than `3^{d_j}` lattice points in some block are unresolved.
    Lattice,
    /// Gauss rule on the unit ball pulled back by `A_{2^{-n}}`, with spectral
    /// shifts. `order` Gauss-Legendre points per radial segment; blocks of
    /// dimension 1 or 2 only.
    Gauss { order: usize },
}

#[derive(Debug, Clone)]
pub struct DifferenceProfile {
    pub order: usize,
    pub shape: BallShape,
    /// Inner exponents of the `h`-integral, one per block.
    pub phi: Vec<f64>,
    pub sampling: HSampling,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(m, z);
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre(m: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Quadrature on the closed unit ball of `R^dim`; weights sum to its volume.
pub fn unit_ball_rule(dim: usize, order: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if order == 0 {
        return Err(Error::InvalidParameter("quadrature order must be positive".into()));
    }
    let (x, w) = gauss_legendre(order);
    match dim {
        1 => {
            // Split at 0 so the kink of |Delta_h f| at h = 0 sits on a node boundary.
            let mut pts = Vec::with_capacity(2 * order);
            let mut wts = Vec::with_capacity(2 * order);
            for shift in [-0.5, 0.5] {
                for (xi, wi) in x.iter().zip(&w) {
                    pts.push(vec![shift + 0.5 * xi]);
                    wts.push(0.5 * wi);
                }
            }
            Ok((pts, wts))
        }
        2 => {
            let angles = 4 * order;
            let mut pts = Vec::with_capacity(order * angles);
            let mut wts = Vec::with_capacity(order * angles);
            for (xi, wi) in x.iter().zip(&w) {
                let r = 0.5 * (xi + 1.0);
                let wr = 0.5 * wi * r;
                for k in 0..angles {
                    let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / angles as f64;
                    pts.push(vec![r * t.cos(), r * t.sin()]);
                    wts.push(wr * 2.0 * std::f64::consts::PI / angles as f64);
                }
            }
            Ok((pts, wts))
        }
        _ => Err(Error::InvalidParameter(format!(
            "Gauss h-sampling supports blocks of dimension 1 or 2, got {dim}"
        ))),
    }
}

/// Nodes of one block: `h`-vectors (block coordinates) with weights summing
/// to one, and lattice steps when exact shifts apply.
struct BlockNodes {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    steps: Option<Vec<Vec<i64>>>,
}

fn block_nodes(
    grid: &TorusGrid,
    va: &DecomposedAnisotropy,
    sampling: HSampling,
    n: usize,
) -> Result<Vec<BlockNodes>> {
    let radius = 2f64.powi(-(n as i32));
    let mut out = Vec::with_capacity(va.num_blocks());
    for (j, block) in va.blocks().iter().enumerate() {
        let axes = va.block_range(j);
        match sampling {
            HSampling::Gauss { order } => {
                let (pts, wts) = unit_ball_rule(block.dim(), order)?;
                let m = block.dilation_matrix(radius)?;
                let points = pts
                    .iter()
                    .map(|u| {
                        (0..u.len())
                            .map(|r| (0..u.len()).map(|c| m[(r, c)] * u[c]).sum())
                            .collect()
                    })
                    .collect();
                let total: f64 = wts.iter().sum();
                out.push(BlockNodes {
                    points,
                    weights: wts.iter().map(|w| w / total).collect(),
                    steps: None,
                });
            }
            HSampling::Lattice => {
                let sub = TorusGrid::new(&grid.dims()[axes.clone()], &grid.period()[axes.clone()])?;
                let mut points = Vec::new();
                let mut steps = Vec::new();
                for i in 0..sub.len() {
                    let h = sub.centered_point(i);
                    if block.quasi_norm(&h)? <= radius {
                        steps.push(
                            sub.multi_index(i)
                                .iter()
                                .enumerate()
                                .map(|(a, &ix)| sub.frequency_index(a, ix))
                                .collect(),
                        );
                        points.push(h);
                    }
                }
                let need = 3usize.pow(block.dim() as u32);
                if points.len() < need {
                    return Err(Error::UnresolvedScale {
                        n,
                        points: points.len(),
                        need,
                    });
                }
                let weights = vec![1.0 / points.len() as f64; points.len()];
                out.push(BlockNodes {
                    points,
                    weights,
                    steps: Some(steps),
                });
            }
        }
    }
    Ok(out)
}

fn delta_at(f: &GridFunction, nodes: &[BlockNodes], choice: &[usize], order: usize) -> Result<GridFunction> {
    if nodes.iter().all(|b| b.steps.is_some()) {
        let steps: Vec<i64> = nodes
            .iter()
            .zip(choice)
            .flat_map(|(b, &c)| b.steps.as_ref().expect("lattice")[c].clone())
            .collect();
        difference_lattice(f, &steps, order)
    } else {
        let h: Vec<f64> = nodes
            .iter()
            .zip(choice)
            .flat_map(|(b, &c)| b.points[c].clone())
            .collect();
        difference_spectral(f, &h, order)
    }
}

/// Mixed `L_phi` aggregation over the node blocks, innermost block first.
fn aggregate(
    f: &GridFunction,
    nodes: &[BlockNodes],
    phi: &[f64],
    order: usize,
    level: usize,
    choice: &mut Vec<usize>,
) -> Result<Vec<f64>> {
    let b = &nodes[level];
    let mut parts = Vec::with_capacity(b.points.len());
    for k in 0..b.points.len() {
        choice[level] = k;
        let field = if level == 0 {
            delta_at(f, nodes, choice, order)?.modulus()
        } else {
            aggregate(f, nodes, phi, order, level - 1, choice)?
        };
        parts.push(field);
    }
    let p = phi[level];
    let len = parts[0].len();
    Ok((0..len)
        .into_par_iter()
        .map(|i| {
            if p.is_infinite() {
                let col: Vec<f64> = parts.iter().map(|v| v[i]).collect();
                return max_of(&col);
            }
            let col: Vec<f64> = parts
                .iter()
                .zip(&b.weights)
                .map(|(v, w)| w * v[i].powf(p))
                .collect();
            pairwise_sum(&col).powf(1.0 / p)
        })
        .collect())
}

fn check_profile(f: &GridFunction, profile: &DifferenceProfile) -> Result<DecomposedAnisotropy> {
    let va = profile.shape.anisotropy()?;
    if va.dim() != f.grid().ndim() {
        return Err(Error::DimensionMismatch {
            expected: f.grid().ndim(),
            got: va.dim(),
        });
    }
    if profile.phi.len() != va.num_blocks() {
        return Err(Error::DimensionMismatch {
            expected: va.num_blocks(),
            got: profile.phi.len(),
        });
    }
    if profile.phi.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::InvalidParameter("inner exponents must be positive".into()));
    }
    Ok(va)
}

/// Mixed `L_phi` mean of `h -> |Delta_h^M f(x)|` over the product of the
/// block balls at scale `n`, innermost block first. Equals
/// `2^{n sum_j tr(A_j)/phi_j} ||1_B(h) Delta_h^M f(x)||_{L_phi(h)}` up to the
/// factor `prod_j |B_j(0,1)|^{1/phi_j}`.
pub fn difference_field(f: &GridFunction, profile: &DifferenceProfile, n: usize) -> Result<Vec<f64>> {
    let va = check_profile(f, profile)?;
    let nodes = block_nodes(f.grid(), &va, profile.sampling, n)?;
    let mut choice = vec![0; nodes.len()];
    aggregate(f, &nodes, &profile.phi, profile.order, nodes.len() - 1, &mut choice)
}

/// Signed mean of `Delta_z^M f` over `z` in the scale-`n` ball, i.e.
/// `2^{n tr(A)} int_{B(0, 2^{-n})} Delta_z^M f dz / |B(0, 1)|`.
pub fn averaged_difference(f: &GridFunction, profile: &DifferenceProfile, n: usize) -> Result<GridFunction> {
    let va = check_profile(f, profile)?;
    let nodes = block_nodes(f.grid(), &va, profile.sampling, n)?;
    let counts: Vec<usize> = nodes.iter().map(|b| b.points.len()).collect();
    let total: usize = counts.iter().product();
    let mut acc = GridFunction::zeros(f.grid().clone(), f.channels());
    let mut choice = vec![0; nodes.len()];
    for t in 0..total {
        let mut rem = t;
        let mut w = 1.0;
        for (j, &c) in counts.iter().enumerate() {
            choice[j] = rem % c;
            rem /= c;
            w *= nodes[j].weights[choice[j]];
        }
        let d = delta_at(f, &nodes, &choice, profile.order)?;
        acc = acc.add(&d.scale(Complex64::new(w, 0.0)))?;
    }
    Ok(acc)
}

/// Result of [`difference_norm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceNorm {
    pub value: f64,
    /// `||f||_{L_p}`.
    pub lp_term: f64,
    /// `||(2^{ns} d_n(f))_n||_{L_p[l_q]}` over the used scales.
    pub difference_term: f64,
    pub scales: Vec<usize>,
    /// Scales skipped by the lattice resolution guard.
    pub excluded_scales: Vec<usize>,
    /// `2^{ns} ||d_n(f)||_{L_p}` per used scale.
    pub per_scale: Vec<f64>,
}

/// Checks the parameter window of the difference characterization.
pub fn validate_window(spec: &SpaceSpec, profile: &DifferenceProfile) -> Result<()> {
    if spec.kind != SpaceKind::F {
        return Err(Error::ParameterWindow("difference norms characterize F spaces".into()));
    }
    if spec.p.iter().any(|&p| !(p > 1.0 && p.is_finite())) {
        return Err(Error::ParameterWindow(format!("p must lie in (1, inf), got {:?}", spec.p)));
    }
    if !(spec.q >= 1.0) {
        return Err(Error::ParameterWindow(format!("q must lie in [1, inf], got {}", spec.q)));
    }
    if !(spec.s > 0.0) {
        return Err(Error::ParameterWindow(format!("s must be positive, got {}", spec.s)));
    }
    if profile.phi.iter().any(|&p| !(p >= 1.0)) {
        return Err(Error::ParameterWindow(format!("phi must lie in [1, inf), got {:?}", profile.phi)));
    }
    if profile.order == 0 {
        return Err(Error::ParameterWindow("difference order must be positive".into()));
    }
    let va = profile.shape.anisotropy()?;
    let lower: f64 = va
        .traces()
        .iter()
        .zip(&profile.phi)
        .map(|(tr, phi)| tr * (1.0 - 1.0 / phi))
        .sum();
    if !(spec.s > lower) {
        return Err(Error::ParameterWindow(format!("need s > {lower}, got {}", spec.s)));
    }
    let m = profile.order as f64;
    let upper = match &profile.shape {
        BallShape::Product { a, decomposition } => {
            m * a.iter().zip(decomposition).map(|(a, &d)| a * d as f64).fold(f64::INFINITY, f64::min)
        }
        BallShape::QuasiNorm(va) => m * va.lambda_min(),
    };
    if !(upper > spec.s) {
        return Err(Error::ParameterWindow(format!(
            "difference order too low: need {upper} > s = {}",
            spec.s
        )));
    }
    Ok(())
}

/// `||f||_{L_p} + ||(2^{ns} d_{M,n}(f))_{n in scales}||_{L_p[l_q]}`.
pub fn difference_norm(
    f: &GridFunction,
    spec: &SpaceSpec,
    profile: &DifferenceProfile,
    scales: std::ops::RangeInclusive<usize>,
) -> Result<DifferenceNorm> {
    validate_window(spec, profile)?;
    let va = check_profile(f, profile)?;
    if spec.decomposition != va.decomposition() {
        return Err(Error::DimensionMismatch {
            expected: va.num_blocks(),
            got: spec.decomposition.len(),
        });
    }
    let grid = f.grid();
    let weight = match &spec.weights {
        Some(w) => Some(WeightField::power(grid, &va, w)?),
        None => None,
    };
    let lp_term = mixed_norm::mixed_lp(f, &spec.p, &spec.decomposition, weight.as_ref())?;
    let mut fields = Vec::new();
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    for n in scales {
        if n == 0 {
            continue;
        }
        match difference_field(f, profile, n) {
            Ok(field) => {
                let factor = 2f64.powf(n as f64 * spec.s);
                fields.push(field.into_iter().map(|v| v * factor).collect::<Vec<f64>>());
                used.push(n);
            }
            Err(Error::UnresolvedScale { .. }) => excluded.push(n),
            Err(e) => return Err(e),
        }
    }
    let per_scale = fields
        .iter()
        .map(|v| mixed_norm::mixed_lp_field(grid, v, &spec.p, &spec.decomposition, weight.as_ref()))
        .collect::<Result<Vec<f64>>>()?;
    let difference_term = if fields.is_empty() {
        0.0
    } else {
        mixed_norm::seq_norm_f(grid, &fields, 0.0, &spec.p, spec.q, &spec.decomposition, weight.as_ref())?
    };
    Ok(DifferenceNorm {
        value: lp_term + difference_term,
        lp_term,
        difference_term,
        scales: used,
        excluded_scales: excluded,
        per_scale,
    })
}
