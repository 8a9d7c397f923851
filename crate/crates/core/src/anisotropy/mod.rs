//! Expansive dilation groups `A_t = exp(A ln t)`, their homogeneous
//! quasi-norms, and block (decomposed) anisotropies.
//!
//! An [`Anisotropy`] is a real square matrix whose spectrum lies in the open
//! right half-plane. Its quasi-norm `rho_A(x)` is the unique `lambda > 0`
//! with `|A_{1/lambda} x| = 1`. Uniqueness is only guaranteed here when
//! `t -> |A_t x|` is strictly increasing, which holds for diagonal matrices
//! with positive entries and for matrices whose symmetric part `A + A^T` is
//! positive definite. Other matrices are rejected.

mod expm;

pub use expm::{expm_pade, EigenExp, EIGEN_CONDITION_LIMIT};

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real parts at or below this value count as "not in C_+".
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Default tolerance of the quasi-norm root finder (in `ln rho`).
pub const QUASI_NORM_TOL: f64 = 1e-10;
/// Iteration cap of the quasi-norm root finder.
pub const QUASI_NORM_MAX_ITER: usize = 200;

#[derive(Debug, Clone)]
enum ExpRoute {
    Diagonal,
    Eigen(EigenExp),
    Pade,
}

/// A validated anisotropy on `R^d` with cached spectral data.
#[derive(Debug, Clone)]
pub struct Anisotropy {
    matrix: DMatrix<f64>,
    trace: f64,
    lambda_min: f64,
    lambda_max: f64,
    diagonal: Option<Vec<f64>>,
    route: ExpRoute,
}

impl Anisotropy {
    /// Validates `matrix` and caches its spectral data.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = matrix.nrows();
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || matrix[(i, j)] == 0.0));
        let eigenvalues: Vec<Complex64> = if is_diag {
            (0..n).map(|i| Complex64::new(matrix[(i, i)], 0.0)).collect()
        } else {
            matrix.clone().complex_eigenvalues().iter().cloned().collect()
        };
        let lambda_min = eigenvalues.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
        let lambda_max = eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        if lambda_min <= SPECTRAL_TOL {
            return Err(Error::NotExpansive {
                min_real_part: lambda_min,
            });
        }
        let trace = matrix.trace();
        let (diagonal, route) = if is_diag {
            (Some((0..n).map(|i| matrix[(i, i)]).collect()), ExpRoute::Diagonal)
        } else {
            let sym = &matrix + matrix.transpose();
            if sym.cholesky().is_none() {
                return Err(Error::NotMonotone);
            }
            let route = match EigenExp::try_new(&matrix, &eigenvalues) {
                Some(e) => ExpRoute::Eigen(e),
                None => ExpRoute::Pade,
            };
            (None, route)
        };
        Ok(Self {
            matrix,
            trace,
            lambda_min,
            lambda_max,
            diagonal,
            route,
        })
    }

    /// Builds from row vectors; rejects ragged or non-square input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, cols: r.len() });
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn diagonal(exponents: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(exponents)))
    }

    pub fn isotropic(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim]).expect("identity is an anisotropy")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Homogeneous dimension `tr A`.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn diagonal_entries(&self) -> Option<&[f64]> {
        self.diagonal.as_deref()
    }

    /// True when the eigendecomposition route is used for `A_t`.
    pub fn uses_eigen_route(&self) -> bool {
        matches!(self.route, ExpRoute::Eigen(_))
    }

    /// `lambda A`, for `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if lambda <= 0.0 {
            return Err(Error::NonPositiveScale(lambda));
        }
        Self::new(&self.matrix * lambda)
    }

    /// `exp(s A)`.
    pub fn exp_scaled(&self, s: f64) -> DMatrix<f64> {
        match &self.route {
            ExpRoute::Diagonal => {
                let d = self.diagonal.as_ref().expect("diagonal route");
                DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    d.len(),
                    d.iter().map(|a| (a * s).exp()),
                ))
            }
            ExpRoute::Eigen(e) => e.exp_scaled(s),
            ExpRoute::Pade => expm_pade(&(&self.matrix * s)),
        }
    }

    /// The dilation matrix `A_t = t^A`.
    pub fn dilation_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::NonPositiveScale(t));
        }
        if let Some(d) = &self.diagonal {
            return Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                d.len(),
                d.iter().map(|a| t.powf(*a)),
            )));
        }
        Ok(self.exp_scaled(t.ln()))
    }

    /// `A_t x`.
    pub fn dilate(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        if t.is_nan() || t <= 0.0 {
            return Err(Error::NonPositiveScale(t));
        }
        if let Some(d) = &self.diagonal {
            return Ok(d.iter().zip(x).map(|(a, xi)| t.powf(*a) * xi).collect());
        }
        let m = self.exp_scaled(t.ln());
        Ok((0..x.len())
            .map(|i| (0..x.len()).map(|j| m[(i, j)] * x[j]).sum())
            .collect())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `rho_A(x)` with the default tolerance.
    pub fn quasi_norm(&self, x: &[f64]) -> Result<f64> {
        self.quasi_norm_tol(x, QUASI_NORM_TOL)
    }

    /// `rho_A(x)`: the `lambda` with `|A_{1/lambda} x| = 1`, to `tol` in
    /// `ln lambda`.
    pub fn quasi_norm_tol(&self, x: &[f64], tol: f64) -> Result<f64> {
        self.check_dim(x)?;
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 == 0.0 {
            return Ok(0.0);
        }
        if let Some(d) = &self.diagonal {
            return self.diagonal_quasi_norm(d, x, r2);
        }
        let ln_r = 0.5 * r2.ln();
        match &self.route {
            ExpRoute::Eigen(e) => {
                let coords = e.project(x);
                let mut buf = vec![0.0; x.len()];
                self.solve_log_radius(ln_r, tol, |u| {
                    e.apply_projected(&coords, -u, &mut buf);
                    0.5 * buf.iter().map(|v| v * v).sum::<f64>().ln()
                })
            }
            _ => self.solve_log_radius(ln_r, tol, |u| {
                let m = expm_pade(&(&self.matrix * (-u)));
                let mut s = 0.0;
                for i in 0..x.len() {
                    let yi: f64 = (0..x.len()).map(|j| m[(i, j)] * x[j]).sum();
                    s += yi * yi;
                }
                0.5 * s.ln()
            }),
        }
    }

    fn diagonal_quasi_norm(&self, d: &[f64], x: &[f64], r2: f64) -> Result<f64> {
        let nz: Vec<(f64, f64)> = d
            .iter()
            .zip(x)
            .filter(|(_, xi)| **xi != 0.0)
            .map(|(a, xi)| (*a, xi * xi))
            .collect();
        if nz.len() == 1 {
            let (a, x2) = nz[0];
            return Ok(x2.sqrt().powf(1.0 / a));
        }
        let a0 = nz[0].0;
        if nz.iter().all(|(a, _)| *a == a0) {
            return Ok(r2.sqrt().powf(1.0 / a0));
        }
        // h(u) = 1/2 ln sum x_i^2 e^{-2 a_i u}, convex and decreasing in u = ln rho.
        let h = |u: f64| -> (f64, f64) {
            let mut s = 0.0;
            let mut ds = 0.0;
            for &(a, x2) in &nz {
                let term = x2 * (-2.0 * a * u).exp();
                s += term;
                ds += -2.0 * a * term;
            }
            (0.5 * s.ln(), 0.5 * ds / s)
        };
        let ln_r = 0.5 * r2.ln();
        let (mut lo, mut hi) = self.initial_bracket(ln_r);
        let mut u = 0.5 * (lo + hi);
        for _ in 0..QUASI_NORM_MAX_ITER {
            let (val, der) = h(u);
            if val > 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let mut next = u - val / der;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 1e-15 * u.abs().max(1.0) {
                return Ok(next.exp());
            }
            u = next;
        }
        Err(Error::NoConvergence { norm: r2.sqrt() })
    }

    /// Bracket for `ln rho` from the spectral envelope of `|A_t x|`.
    fn initial_bracket(&self, ln_r: f64) -> (f64, f64) {
        let eps = 0.1f64.min(self.lambda_min / 2.0);
        let ua = ln_r / (self.lambda_max + 0.1);
        let ub = ln_r / (self.lambda_min - eps);
        (ua.min(ub), ua.max(ub))
    }

    /// Finds `u` with `g(u) = 0` for the decreasing `g(u) = ln |A_{e^{-u}} x|`.
    fn solve_log_radius(&self, ln_r: f64, tol: f64, mut g: impl FnMut(f64) -> f64) -> Result<f64> {
        let (mut lo, mut hi) = self.initial_bracket(ln_r);
        let mut width = (hi - lo).max(0.5);
        let mut f_lo = g(lo);
        let mut guard = 0;
        while f_lo < 0.0 {
            lo -= width;
            width *= 2.0;
            f_lo = g(lo);
            guard += 1;
            if guard > 60 {
                return Err(Error::NoConvergence { norm: ln_r.exp() });
            }
        }
        let mut f_hi = g(hi);
        while f_hi > 0.0 {
            hi += width;
            width *= 2.0;
            f_hi = g(hi);
            guard += 1;
            if guard > 120 {
                return Err(Error::NoConvergence { norm: ln_r.exp() });
            }
        }
        if f_lo == 0.0 {
            return Ok(lo.exp());
        }
        if f_hi == 0.0 {
            return Ok(hi.exp());
        }
        // Illinois-modified regula falsi, kept inside the bracket.
        let mut side = 0i8;
        for _ in 0..QUASI_NORM_MAX_ITER {
            let mut c = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            if !(c > lo && c < hi) {
                c = 0.5 * (lo + hi);
            }
            let fc = g(c);
            if fc.abs() <= tol * 1e-2 || (hi - lo) <= tol {
                return Ok(c.exp());
            }
            if fc > 0.0 {
                lo = c;
                f_lo = fc;
                if side == 1 {
                    f_hi *= 0.5;
                }
                side = 1;
            } else {
                hi = c;
                f_hi = fc;
                if side == -1 {
                    f_lo *= 0.5;
                }
                side = -1;
            }
        }
        Err(Error::NoConvergence { norm: ln_r.exp() })
    }

    /// Measured constants `(c_lo, c_hi)` with
    /// `c_lo t^{lambda_min - eps} <= |A_t x| <= c_hi t^{lambda_max + eps}`
    /// over seeded unit vectors `x` and `t` in `[1, t_max]`.
    pub fn envelope_constants(&self, eps: f64, t_max: f64, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for _ in 0..samples {
            let x = random_unit(&mut rng, d);
            let t = t_max.powf(rng.random::<f64>());
            let y = self.dilate(t, &x).expect("t > 0");
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            lo = lo.min(ny / t.powf(self.lambda_min - eps));
            hi = hi.max(ny / t.powf(self.lambda_max + eps));
        }
        (lo, hi)
    }
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.iter().map(|a| a / n).collect();
        }
    }
}

/// Ball radii: one radius for the max-type quasi-norm, or one per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Radii {
    Scalar(f64),
    PerBlock(Vec<f64>),
}

/// A `d`-decomposition of `R^d` together with one anisotropy per block.
#[derive(Debug, Clone)]
pub struct DecomposedAnisotropy {
    blocks: Vec<Anisotropy>,
    decomposition: Vec<usize>,
    offsets: Vec<usize>,
    quasi_triangle: OnceLock<f64>,
}

/// Sample count of the cached quasi-triangle estimate.
pub const QUASI_TRIANGLE_SAMPLES: usize = 4000;
const QUASI_TRIANGLE_SEED: u64 = 0x5eed_c0a5;

impl DecomposedAnisotropy {
    pub fn new(blocks: Vec<Anisotropy>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter("decomposition needs at least one block".into()));
        }
        let decomposition: Vec<usize> = blocks.iter().map(Anisotropy::dim).collect();
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for d in &decomposition {
            acc += d;
            offsets.push(acc);
        }
        Ok(Self {
            blocks,
            decomposition,
            offsets,
            quasi_triangle: OnceLock::new(),
        })
    }

    pub fn single(a: Anisotropy) -> Self {
        Self::new(vec![a]).expect("one block")
    }

    /// One diagonal block per entry of `exponents`.
    pub fn diagonal_blocks(exponents: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            exponents
                .iter()
                .map(|e| Anisotropy::diagonal(e))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Isotropic blocks of the given sizes.
    pub fn isotropic(decomposition: &[usize]) -> Self {
        Self::new(decomposition.iter().map(|&d| Anisotropy::isotropic(d)).collect())
            .expect("nonempty")
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn decomposition(&self) -> &[usize] {
        &self.decomposition
    }

    pub fn blocks(&self) -> &[Anisotropy] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &Anisotropy {
        &self.blocks[j]
    }

    /// Coordinate range of block `j`.
    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    /// Per-block homogeneous dimensions `tr A_j`.
    pub fn traces(&self) -> Vec<f64> {
        self.blocks.iter().map(Anisotropy::trace).collect()
    }

    pub fn trace(&self) -> f64 {
        self.traces().iter().sum()
    }

    pub fn lambda_min(&self) -> f64 {
        self.blocks.iter().map(Anisotropy::lambda_min).fold(f64::INFINITY, f64::min)
    }

    pub fn is_diagonal(&self) -> bool {
        self.blocks.iter().all(|b| b.diagonal_entries().is_some())
    }

    /// Diagonal exponents of all coordinates, if every block is diagonal.
    pub fn diagonal_exponents(&self) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            out.extend_from_slice(b.diagonal_entries()?);
        }
        Some(out)
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(
            self.blocks
                .iter()
                .map(|b| b.scaled(lambda))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// The block-diagonal direct sum, itself an anisotropy on `R^d`.
    pub fn direct_sum(&self) -> Anisotropy {
        let d = self.dim();
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (j, b) in self.blocks.iter().enumerate() {
            let o = self.offsets[j];
            m.view_mut((o, o), (b.dim(), b.dim())).copy_from(b.matrix());
        }
        Anisotropy::new(m).expect("direct sum of anisotropies is an anisotropy")
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Block-wise dilation `(A_{1,t} x_1, ..., A_{l,t} x_l)`.
    pub fn dilate(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = Vec::with_capacity(x.len());
        for (j, b) in self.blocks.iter().enumerate() {
            out.extend(b.dilate(t, &x[self.block_range(j)])?);
        }
        Ok(out)
    }

    pub fn block_quasi_norms(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.blocks
            .iter()
            .enumerate()
            .map(|(j, b)| b.quasi_norm(&x[self.block_range(j)]))
            .collect()
    }

    /// `rho_vecA(x) = max_j rho_{A_j}(x_j)`.
    pub fn vector_quasi_norm(&self, x: &[f64]) -> Result<f64> {
        Ok(self.block_quasi_norms(x)?.into_iter().fold(0.0, f64::max))
    }

    /// Closed-ball membership. A scalar radius uses `rho_vecA`; per-block
    /// radii test each block separately.
    pub fn ball_contains(&self, center: &[f64], radii: &Radii, x: &[f64]) -> Result<bool> {
        self.check_dim(center)?;
        self.check_dim(x)?;
        let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
        let rhos = self.block_quasi_norms(&diff)?;
        match radii {
            Radii::Scalar(r) => {
                if !(*r > 0.0) {
                    return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
                }
                Ok(rhos.iter().all(|rho| rho <= r))
            }
            Radii::PerBlock(rs) => {
                if rs.len() != self.num_blocks() {
                    return Err(Error::DimensionMismatch {
                        expected: self.num_blocks(),
                        got: rs.len(),
                    });
                }
                if rs.iter().any(|r| !(*r > 0.0)) {
                    return Err(Error::InvalidParameter("radii must be positive".into()));
                }
                Ok(rhos.iter().zip(rs).all(|(rho, r)| rho <= r))
            }
        }
    }

    /// Empirical quasi-triangle constant `c_A` (cached; an estimate, not a
    /// certified bound).
    pub fn quasi_triangle_constant(&self) -> f64 {
        *self
            .quasi_triangle
            .get_or_init(|| self.estimate_quasi_triangle(QUASI_TRIANGLE_SAMPLES, QUASI_TRIANGLE_SEED))
    }

    /// `sup rho(x + y) / (rho(x) + rho(y))` over seeded pairs, followed by a
    /// short local search around the best pairs.
    pub fn estimate_quasi_triangle(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.dim();
        let ratio = |x: &[f64], y: &[f64]| -> f64 {
            let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
            let num = self.vector_quasi_norm(&s).unwrap_or(0.0);
            let den = self.vector_quasi_norm(x).unwrap_or(0.0) + self.vector_quasi_norm(y).unwrap_or(0.0);
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        };
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let u = random_unit(rng, d);
            let scale = (rng.random::<f64>() * 6.0 - 3.0).exp();
            u.iter().map(|v| v * scale).collect()
        };
        let mut best: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
        for _ in 0..samples {
            let x = draw(&mut rng);
            let y = draw(&mut rng);
            let r = ratio(&x, &y);
            best.push((r, x, y));
            if best.len() > 16 {
                best.sort_by(|a, b| b.0.total_cmp(&a.0));
                best.truncate(8);
            }
        }
        best.sort_by(|a, b| b.0.total_cmp(&a.0));
        best.truncate(8);
        let mut sup = best.first().map(|b| b.0).unwrap_or(1.0);
        for (mut r, mut x, mut y) in best {
            let mut step = 0.25;
            for _ in 0..80 {
                let nx: Vec<f64> = x
                    .iter()
                    .map(|v| v * (1.0 + step * rng.sample::<f64, _>(StandardNormal)))
                    .collect();
                let ny: Vec<f64> = y
                    .iter()
                    .map(|v| v + step * v.abs().max(1e-3) * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let nr = ratio(&nx, &ny);
                if nr > r {
                    r = nr;
                    x = nx;
                    y = ny;
                } else {
                    step *= 0.95;
                }
            }
            sup = sup.max(r);
        }
        sup.max(1.0)
    }

    /// Monte Carlo volume of the closed ball `B(0, R)` together with its
    /// standard error.
    pub fn ball_volume_mc(&self, radii: &Radii, samples: usize, seed: u64) -> Result<(f64, f64)> {
        let rs: Vec<f64> = match radii {
            Radii::Scalar(r) => vec![*r; self.num_blocks()],
            Radii::PerBlock(v) => v.clone(),
        };
        // B^{A_j}(0, R) = A_{j,R}(unit Euclidean ball); bound each coordinate
        // by the row norm of the dilation matrix.
        let mut half_widths = Vec::with_capacity(self.dim());
        for (b, r) in self.blocks.iter().zip(&rs) {
            let m = b.dilation_matrix(*r)?;
            for i in 0..b.dim() {
                half_widths.push(m.row(i).iter().map(|v| v * v).sum::<f64>().sqrt());
            }
        }
        let box_vol: f64 = half_widths.iter().map(|w| 2.0 * w).product();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = vec![0.0; self.dim()];
        let mut hits = 0usize;
        let mut x = vec![0.0; self.dim()];
        for _ in 0..samples {
            for (xi, w) in x.iter_mut().zip(&half_widths) {
                *xi = (2.0 * rng.random::<f64>() - 1.0) * w;
            }
            if self.ball_contains(&center, &Radii::PerBlock(rs.clone()), &x)? {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        let se = (p * (1.0 - p) / samples as f64).sqrt() * box_vol;
        Ok((p * box_vol, se))
    }
}
