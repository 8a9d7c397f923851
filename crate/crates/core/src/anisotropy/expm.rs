//! Matrix exponentials `exp(s A)` for small real matrices.
//!
//! Two routes: an eigendecomposition route for matrices that are
//! diagonalizable with a well-conditioned eigenbasis, and a degree-13 Padé
//! scaling-and-squaring route that works for any input.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest accepted 2-norm condition number of the eigenvector matrix.
pub const EIGEN_CONDITION_LIMIT: f64 = 1e8;

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

fn norm1(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring with a [13/13] Padé approximant.
pub fn expm_pade(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let nrm = norm1(a);
    let squarings = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(squarings);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = &a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Cached eigendecomposition `A = V diag(lambda) V^{-1}`.
#[derive(Debug, Clone)]
pub struct EigenExp {
    values: Vec<Complex64>,
    vectors: DMatrix<Complex64>,
    inverse: DMatrix<Complex64>,
}

impl EigenExp {
    /// Attempts the decomposition. Returns `None` when eigenvalues cluster or
    /// the eigenvector basis is too ill-conditioned.
    pub fn try_new(a: &DMatrix<f64>, eigenvalues: &[Complex64]) -> Option<Self> {
        let n = a.nrows();
        let scale = eigenvalues.iter().map(|l| l.norm()).fold(1.0, f64::max);
        for i in 0..n {
            for j in (i + 1)..n {
                if (eigenvalues[i] - eigenvalues[j]).norm() < 1e-6 * scale {
                    return None;
                }
            }
        }
        let ac: DMatrix<Complex64> = a.map(|v| Complex64::new(v, 0.0));
        let mut vectors = DMatrix::<Complex64>::zeros(n, n);
        for (k, &lambda) in eigenvalues.iter().enumerate() {
            let shifted = &ac - DMatrix::<Complex64>::identity(n, n) * lambda;
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t?;
            let (imin, _) = svd
                .singular_values
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
            for r in 0..n {
                vectors[(r, k)] = v_t[(imin, r)].conj();
            }
        }
        let sv = vectors.clone().svd(false, false).singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin <= 0.0 || smax / smin > EIGEN_CONDITION_LIMIT {
            return None;
        }
        let inverse = vectors.clone().try_inverse()?;
        Some(Self {
            values: eigenvalues.to_vec(),
            vectors,
            inverse,
        })
    }

    /// `exp(s A)` as a real matrix.
    pub fn exp_scaled(&self, s: f64) -> DMatrix<f64> {
        let n = self.values.len();
        let mut out = DMatrix::<f64>::zeros(n, n);
        let factors: Vec<Complex64> = self.values.iter().map(|l| (l * s).exp()).collect();
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.vectors[(i, k)] * factors[k] * self.inverse[(k, j)];
                }
                out[(i, j)] = acc.re;
            }
        }
        out
    }

    /// Coordinates of `x` in the eigenbasis, reusable across many `s`.
    pub fn project(&self, x: &[f64]) -> Vec<Complex64> {
        let n = self.values.len();
        (0..n)
            .map(|k| {
                (0..n).fold(Complex64::new(0.0, 0.0), |acc, j| {
                    acc + self.inverse[(k, j)] * x[j]
                })
            })
            .collect()
    }

    /// `exp(s A) x` given `coords = project(x)`.
    pub fn apply_projected(&self, coords: &[Complex64], s: f64, out: &mut [f64]) {
        let n = self.values.len();
        let factors: Vec<Complex64> = self
            .values
            .iter()
            .zip(coords)
            .map(|(l, c)| (l * s).exp() * c)
            .collect();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, f) in factors.iter().enumerate() {
                acc += self.vectors[(i, k)] * f;
            }
            *o = acc.re;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn pade_of_jordan_block() {
        // exp([[1,1],[0,1]]) = e [[1,1],[0,1]]
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let e = std::f64::consts::E;
        let want = DMatrix::from_row_slice(2, 2, &[e, e, 0.0, e]);
        assert!(max_abs_diff(&expm_pade(&a), &want) < 1e-14);
    }

    #[test]
    fn pade_of_large_diagonal_needs_squaring() {
        let a = DMatrix::from_row_slice(2, 2, &[20.0, 0.0, 0.0, -3.0]);
        let got = expm_pade(&a);
        assert!((got[(0, 0)] / 20f64.exp() - 1.0).abs() < 1e-13);
        assert!((got[(1, 1)] / (-3f64).exp() - 1.0).abs() < 1e-13);
        assert!(got[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn eigen_and_pade_agree_on_diagonalizable_inputs() {
        let cases = [
            vec![2.0, 1.0, 0.0, 1.0],
            vec![1.0, 0.5, -0.2, 2.0],
            vec![1.5, -1.0, 1.0, 1.5], // complex pair
            vec![3.0, 0.2, 0.1, 0.7],
        ];
        for c in cases {
            let a = DMatrix::from_row_slice(2, 2, &c);
            let ev: Vec<Complex64> = a.clone().complex_eigenvalues().iter().cloned().collect();
            let eig = EigenExp::try_new(&a, &ev).expect("diagonalizable");
            for s in [-1.3, -0.25, 0.0, 0.7, 1.9] {
                let lhs = eig.exp_scaled(s);
                let rhs = expm_pade(&(&a * s));
                let scale = rhs.iter().map(|v| v.abs()).fold(1.0, f64::max);
                assert!(max_abs_diff(&lhs, &rhs) / scale < 1e-12, "case {c:?}, s {s}");
            }
        }
    }

    #[test]
    fn repeated_eigenvalue_is_refused() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let ev: Vec<Complex64> = a.clone().complex_eigenvalues().iter().cloned().collect();
        assert!(EigenExp::try_new(&a, &ev).is_none());
    }
}
