//! Dyadic cubes and local polynomial oscillation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::anisotropy::DecomposedAnisotropy;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::numeric::pairwise_sum;

pub const IRLS_MAX_ITER: usize = 50;
pub const IRLS_TOL: f64 = 1e-8;
/// Slack on cube faces in local coordinates, so lattice points on a face
/// land in exactly one cube despite rounding in `A_{2^n}`.
const FACE_TOL: f64 = 1e-9;

fn inside(u: &[f64], half: f64) -> bool {
    u.iter().all(|&v| -half - FACE_TOL <= v && v < half - FACE_TOL)
}

/// `A_{2^{-n}}([0,1)^d + k)`, or with `widen = Some(b)` the cube
/// `A_{2^{-n}}([(1-b)/2, (1+b)/2)^d + k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicCube {
    pub scale: i32,
    pub index: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widen: Option<f64>,
}

impl DyadicCube {
    pub fn new(scale: i32, index: Vec<i64>) -> Self {
        Self {
            scale,
            index,
            widen: None,
        }
    }

    pub fn widened(mut self, b: f64) -> Self {
        self.widen = Some(b);
        self
    }

    fn width(&self) -> Result<f64> {
        let b = self.widen.unwrap_or(1.0);
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("cube widening must be positive, got {b}")));
        }
        Ok(b)
    }

    /// Local coordinates `A_{2^n} x - k - 1/2`, centered on the cube.
    fn local(&self, to_unit: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        (0..d)
            .map(|r| (0..d).map(|c| to_unit[(r, c)] * x[c]).sum::<f64>() - self.index[r] as f64 - 0.5)
            .collect()
    }

    fn check(&self, va: &DecomposedAnisotropy) -> Result<DMatrix<f64>> {
        if self.index.len() != va.dim() {
            return Err(Error::DimensionMismatch {
                expected: va.dim(),
                got: self.index.len(),
            });
        }
        self.width()?;
        va.direct_sum().dilation_matrix(2f64.powi(self.scale))
    }

    /// Membership of a point in `R^d` (no periodic wrap).
    pub fn contains(&self, va: &DecomposedAnisotropy, x: &[f64]) -> Result<bool> {
        let m = self.check(va)?;
        if x.len() != va.dim() {
            return Err(Error::DimensionMismatch {
                expected: va.dim(),
                got: x.len(),
            });
        }
        let half = 0.5 * self.width()?;
        Ok(inside(&self.local(&m, x), half))
    }

    /// Grid samples whose periodic image lies in the cube, with centered
    /// local coordinates. Each sample is counted once.
    pub fn samples(&self, f: &GridFunction, va: &DecomposedAnisotropy) -> Result<Vec<(usize, Vec<f64>)>> {
        let m = self.check(va)?;
        let grid = f.grid();
        if grid.ndim() != va.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.ndim(),
                got: va.dim(),
            });
        }
        let half = 0.5 * self.width()?;
        let d = grid.ndim();
        let images = 3usize.pow(d as u32);
        let mut out = Vec::new();
        for i in 0..grid.len() {
            let p = grid.point(i);
            for t in 0..images {
                let mut rem = t;
                let x: Vec<f64> = (0..d)
                    .map(|a| {
                        let shift = (rem % 3) as f64 - 1.0;
                        rem /= 3;
                        p[a] + shift * grid.period()[a]
                    })
                    .collect();
                let u = self.local(&m, &x);
                if inside(&u, half) {
                    out.push((i, u));
                    break;
                }
            }
        }
        Ok(out)
    }
}

/// Exponents of the monomials of total degree `< order` in `dim` variables.
pub fn monomials(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if order == 0 {
        return out;
    }
    rec(dim, order - 1, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    /// `inf_pi ||(f - pi) 1_Q||_{L_p}` over polynomials of degree `< M`.
    pub value: f64,
    /// `value / ||1_Q||_{L_p}`.
    pub normalized: f64,
    pub samples: usize,
    /// Set when the minimizer is only approximated (`p = inf` uses the
    /// least-squares fit).
    pub suboptimal: bool,
}

/// Best approximation error of `f` on the cube by polynomials of total
/// degree `< order`, in `L_p(Q)` for `p` in `{1, 2, inf}`. `order = 0`
/// subtracts nothing.
pub fn oscillation(
    f: &GridFunction,
    order: usize,
    cube: &DyadicCube,
    va: &DecomposedAnisotropy,
    p: f64,
) -> Result<Oscillation> {
    if !(p == 1.0 || p == 2.0 || p == f64::INFINITY) {
        return Err(Error::InvalidParameter(format!("oscillation supports p in {{1, 2, inf}}, got {p}")));
    }
    let pts = cube.samples(f, va)?;
    let mons = monomials(va.dim(), order);
    if pts.is_empty() || pts.len() < mons.len() {
        return Err(Error::DegenerateCube {
            samples: pts.len(),
            coefficients: mons.len(),
        });
    }
    let n = f.grid().len();
    let ch = f.channels();
    let cell = f.grid().cell_volume();
    let design = DMatrix::from_fn(pts.len(), mons.len(), |r, c| {
        pts[r].1.iter().zip(&mons[c]).map(|(u, &e)| u.powi(e as i32)).product()
    });
    // Real and imaginary part of each channel as separate right-hand sides.
    let rhs = DMatrix::from_fn(pts.len(), 2 * ch, |r, c| {
        let v = f.samples()[(c / 2) * n + pts[r].0];
        if c % 2 == 0 {
            v.re
        } else {
            v.im
        }
    });
    let residual_norms = |weights: Option<&[f64]>| -> Result<Vec<f64>> {
        if mons.is_empty() {
            return Ok(row_norms(&rhs));
        }
        let (a, b) = match weights {
            Some(w) => {
                let sw = DVector::from_iterator(w.len(), w.iter().map(|v| v.sqrt()));
                (
                    DMatrix::from_fn(design.nrows(), design.ncols(), |r, c| design[(r, c)] * sw[r]),
                    DMatrix::from_fn(rhs.nrows(), rhs.ncols(), |r, c| rhs[(r, c)] * sw[r]),
                )
            }
            None => (design.clone(), rhs.clone()),
        };
        let svd = a.svd(true, true);
        let coef = svd
            .solve(&b, 1e-12)
            .map_err(|e| Error::InvalidParameter(format!("least squares failed: {e}")))?;
        Ok(row_norms(&(&rhs - &design * coef)))
    };
    let residual = residual_norms(None)?;
    let count = pts.len() as f64;
    let (value, normalizer, suboptimal) = if p == 2.0 {
        let sq: Vec<f64> = residual.iter().map(|v| v * v).collect();
        ((pairwise_sum(&sq) * cell).sqrt(), (count * cell).sqrt(), false)
    } else if p == 1.0 {
        let l1 = |r: &[f64]| pairwise_sum(r) * cell;
        let mut best = l1(&residual);
        let mut current = residual;
        let floor = 1e-12 * current.iter().fold(0.0, |a: f64, &b| a.max(b)).max(f64::MIN_POSITIVE);
        for _ in 0..IRLS_MAX_ITER {
            if mons.is_empty() || best == 0.0 {
                break;
            }
            let w: Vec<f64> = current.iter().map(|&r| 1.0 / r.max(floor)).collect();
            current = residual_norms(Some(&w))?;
            let obj = l1(&current);
            let improved = best - obj;
            best = best.min(obj);
            if improved.abs() <= IRLS_TOL * best.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        (best, count * cell, false)
    } else {
        let sup = residual.iter().fold(0.0, |a: f64, &b| a.max(b));
        (sup, 1.0, !mons.is_empty())
    };
    Ok(Oscillation {
        value,
        normalized: value / normalizer,
        samples: pts.len(),
        suboptimal,
    })
}

/// Euclidean norm of each row over the (re, im) channel columns.
fn row_norms(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].powi(2)).sum::<f64>().sqrt())
        .collect()
}
