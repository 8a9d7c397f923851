//! Anisotropic Littlewood-Paley filter banks on the frequency lattice.
//!
//! With `a_n(xi) = theta((2^{-n} rho(xi) - gamma) / (delta - gamma))` and the
//! smoothstep `theta(u) = 1 - (3u^2 - 2u^3)` clamped to `[0, 1]`, the bank
//! stores `phi_0 = a_0` and `phi_n = a_n - a_{n-1}`. Since
//! `rho(A_{2^{-n}} xi) = 2^{-n} rho(xi)` exactly and scaling by a power of two
//! is exact in floating point, `a_n` is literally `phi_0(A_{2^{-n}} .)`, and
//! `sum_{n <= N} phi_n = a_N` telescopes without rounding.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::anisotropy::DecomposedAnisotropy;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, TorusGrid};

/// Default inner radius of the flat zone of `phi_0`.
pub const DEFAULT_GAMMA: f64 = 1.0;
/// Default outer radius of the support of `phi_0`.
pub const DEFAULT_DELTA: f64 = 2.0;

/// Relative size below which a spectral coefficient counts as zero in the
/// coverage check.
pub const COVERAGE_THRESHOLD: f64 = 1e-12;

/// Clamped C^1 smoothstep, 1 at `u <= 0` and 0 at `u >= 1`.
pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        1.0 - (3.0 * u * u - 2.0 * u * u * u)
    }
}

#[derive(Debug, Clone)]
pub struct FilterBank {
    grid: TorusGrid,
    va: DecomposedAnisotropy,
    axes: std::ops::Range<usize>,
    gamma: f64,
    delta: f64,
    n_max: usize,
    nyquist_radius: f64,
    rho: Vec<f64>,
    multipliers: Vec<Vec<f64>>,
}

impl FilterBank {
    /// Bank acting on all axes of `grid`.
    pub fn build(grid: &TorusGrid, va: &DecomposedAnisotropy, gamma: f64, delta: f64) -> Result<Self> {
        Self::build_on_axes(grid, va, 0..grid.ndim(), gamma, delta)
    }

    /// Bank whose filters depend only on the frequencies of `axes`; the
    /// remaining coordinates are carried along untouched.
    pub fn build_on_axes(
        grid: &TorusGrid,
        va: &DecomposedAnisotropy,
        axes: std::ops::Range<usize>,
        gamma: f64,
        delta: f64,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma < delta && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < gamma < delta, got gamma = {gamma}, delta = {delta}"
            )));
        }
        if axes.end > grid.ndim() || axes.is_empty() || va.dim() != axes.len() {
            return Err(Error::DimensionMismatch {
                expected: axes.len(),
                got: va.dim(),
            });
        }
        let rho: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| va.vector_quasi_norm(&grid.frequency(i)[axes.clone()]))
            .collect::<Result<_>>()?;
        let mut nyquist_radius = f64::INFINITY;
        for (i, &r) in rho.iter().enumerate() {
            let idx = grid.multi_index(i);
            if axes.clone().any(|j| idx[j] == grid.dims()[j] / 2) {
                nyquist_radius = nyquist_radius.min(r);
            }
        }
        if delta > nyquist_radius {
            return Err(Error::NoUsableScale {
                delta,
                nyquist: nyquist_radius,
            });
        }
        let mut n_max = 0usize;
        while delta * 2f64.powi(n_max as i32 + 1) <= nyquist_radius {
            n_max += 1;
        }
        let width = delta - gamma;
        let profile = |n: usize| -> Vec<f64> {
            let scale = 2f64.powi(-(n as i32));
            rho.iter().map(|r| smoothstep((scale * r - gamma) / width)).collect()
        };
        let mut multipliers = Vec::with_capacity(n_max + 1);
        let mut prev = profile(0);
        multipliers.push(prev.clone());
        for n in 1..=n_max {
            let cur = profile(n);
            multipliers.push(cur.iter().zip(&prev).map(|(a, b)| a - b).collect());
            prev = cur;
        }
        Ok(Self {
            grid: grid.clone(),
            va: va.clone(),
            axes,
            gamma,
            delta,
            n_max,
            nyquist_radius,
            rho,
            multipliers,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn anisotropy(&self) -> &DecomposedAnisotropy {
        &self.va
    }

    pub fn axes(&self) -> std::ops::Range<usize> {
        self.axes.clone()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn nyquist_radius(&self) -> f64 {
        self.nyquist_radius
    }

    /// Largest quasi-norm on which the multipliers sum to one.
    pub fn coverage_radius(&self) -> f64 {
        self.gamma * 2f64.powi(self.n_max as i32)
    }

    /// `rho_vecA` over the active frequency coordinates, in spectral order.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn multiplier(&self, n: usize) -> Result<&[f64]> {
        self.multipliers
            .get(n)
            .map(Vec::as_slice)
            .ok_or(Error::ScaleOutOfRange { n, n_max: self.n_max })
    }

    pub fn multipliers(&self) -> &[Vec<f64>] {
        &self.multipliers
    }

    /// Short provenance string.
    pub fn id(&self) -> String {
        let dims: Vec<String> = self.grid.dims().iter().map(|d| d.to_string()).collect();
        format!(
            "grid={};axes={}..{};gamma={};delta={};n_max={}",
            dims.join("x"),
            self.axes.start,
            self.axes.end,
            self.gamma,
            self.delta,
            self.n_max
        )
    }

    /// Min and max of `sum_n phi_n^2` over the covered band.
    pub fn square_sum_bounds(&self) -> (f64, f64) {
        let limit = self.coverage_radius();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (i, &r) in self.rho.iter().enumerate() {
            if r <= limit {
                let s: f64 = self.multipliers.iter().map(|m| m[i] * m[i]).sum();
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        (lo, hi)
    }

    /// Fails when the spectrum of `f` reaches beyond the covered band.
    pub fn check_coverage(&self, f: &GridFunction) -> Result<()> {
        self.check_grid(f)?;
        let spec = f.spectrum();
        let peak = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Ok(());
        }
        let limit = self.coverage_radius();
        let n = self.grid.len();
        let mut worst: Option<f64> = None;
        for (i, v) in spec.iter().enumerate() {
            let r = self.rho[i % n];
            if r > limit && v.norm() > COVERAGE_THRESHOLD * peak {
                worst = Some(worst.map_or(r, |w: f64| w.max(r)));
            }
        }
        match worst {
            Some(rho) => Err(Error::CoverageViolation { rho, limit }),
            None => Ok(()),
        }
    }

    fn check_grid(&self, f: &GridFunction) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::InvalidParameter("function and bank live on different grids".into()));
        }
        Ok(())
    }

    /// `S_n f`.
    pub fn apply(&self, n: usize, f: &GridFunction) -> Result<GridFunction> {
        self.check_grid(f)?;
        f.multiply_spectrum(self.multiplier(n)?)
    }

    /// `S_0 f, ..., S_{n_max} f` after the coverage check.
    pub fn decompose(&self, f: &GridFunction) -> Result<Vec<GridFunction>> {
        self.check_coverage(f)?;
        (0..=self.n_max).into_par_iter().map(|n| self.apply(n, f)).collect()
    }

    /// Pointwise sum of pieces.
    pub fn reconstruct(&self, pieces: &[GridFunction]) -> Result<GridFunction> {
        if pieces.len() != self.n_max + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n_max + 1,
                got: pieces.len(),
            });
        }
        let mut acc = pieces[0].clone();
        for p in &pieces[1..] {
            acc = acc.add(p)?;
        }
        Ok(acc)
    }

    /// A lattice frequency (signed indices over all grid axes, zero off the
    /// bank's axes) on which exactly one multiplier `n >= 1` equals one, with
    /// the smallest quasi-norm. Returns `(n, k)`.
    pub fn flat_zone_mode(&self) -> Option<(usize, Vec<i64>)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..self.grid.len() {
            let idx = self.grid.multi_index(i);
            let off_axes = (0..self.grid.ndim()).any(|a| !self.axes.contains(&a) && idx[a] != 0);
            if off_axes || self.grid.is_nyquist(i) {
                continue;
            }
            for n in 1..=self.n_max {
                if self.multipliers[n][i] == 1.0 && best.is_none_or(|(r, _, _)| self.rho[i] < r) {
                    best = Some((self.rho[i], n, i));
                }
            }
        }
        best.map(|(_, n, i)| (n, self.grid.frequency_indices(i)))
    }

    /// Multiplier `n` as a real grid function (spectral storage order), for
    /// export.
    pub fn multiplier_function(&self, n: usize) -> Result<GridFunction> {
        let m = self.multiplier(n)?;
        GridFunction::new(
            self.grid.clone(),
            1,
            m.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::Anisotropy;
    use crate::grid::{dilate_sample, random_bandlimited};
    use std::f64::consts::PI;

    fn aniso_12() -> DecomposedAnisotropy {
        DecomposedAnisotropy::diagonal_blocks(&[vec![1.0], vec![2.0]]).unwrap()
    }

    #[test]
    fn n_max_example() {
        let g = TorusGrid::unit(&[64]).unwrap();
        let bank = FilterBank::build(&g, &DecomposedAnisotropy::isotropic(&[1]), 1.0, 2.0).unwrap();
        assert!((bank.nyquist_radius() - 64.0 * PI).abs() < 1e-12);
        assert_eq!(bank.n_max(), ((64.0 * PI / 2.0).log2().floor()) as usize);
        assert_eq!(bank.n_max(), 6);
        assert_eq!(bank.multiplier(0).unwrap()[0], 1.0);
        for n in 1..=6 {
            assert_eq!(bank.multiplier(n).unwrap()[0], 0.0);
        }
        assert!(matches!(bank.multiplier(7), Err(Error::ScaleOutOfRange { .. })));
    }

    #[test]
    fn no_usable_scale() {
        let g = TorusGrid::new(&[4], &[2.0 * PI]).unwrap();
        let r = FilterBank::build(&g, &DecomposedAnisotropy::isotropic(&[1]), 1.0, 3.0);
        assert!(matches!(r, Err(Error::NoUsableScale { .. })));
        assert!(FilterBank::build(&g, &DecomposedAnisotropy::isotropic(&[1]), 2.0, 1.0).is_err());
    }

    #[test]
    fn exact_partition_and_structure() {
        let g = TorusGrid::unit(&[128, 128]).unwrap();
        let va = aniso_12();
        let bank = FilterBank::build(&g, &va, 1.0, 2.0).unwrap();
        let limit = bank.coverage_radius();
        for (i, &r) in bank.rho().iter().enumerate() {
            let ms: Vec<f64> = bank.multipliers().iter().map(|m| m[i]).collect();
            assert!(ms[0] >= 0.0 && ms[0] <= 1.0);
            if r <= 1.0 {
                assert_eq!(ms[0], 1.0);
            }
            if r >= 2.0 {
                assert_eq!(ms[0], 0.0);
            }
            if r <= limit {
                let s: f64 = ms.iter().sum();
                assert_eq!(s, 1.0, "rho {r}");
            }
            for (n, m) in ms.iter().enumerate().skip(1) {
                let lo = 2f64.powi(n as i32 - 1);
                let hi = 2.0 * 2f64.powi(n as i32);
                if *m != 0.0 {
                    assert!(r >= lo && r <= hi, "phi_{n} at rho {r}");
                }
            }
            for n in 0..ms.len() {
                for m in (n + 2)..ms.len() {
                    assert_eq!(ms[n] * ms[m], 0.0);
                }
            }
        }
        let (lo, hi) = bank.square_sum_bounds();
        assert!(lo >= 0.5 - 1e-15 && hi <= 1.0);
    }

    #[test]
    fn stored_fields_are_dilated_profiles() {
        let g = TorusGrid::unit(&[32, 32]).unwrap();
        let va = aniso_12();
        let bank = FilterBank::build(&g, &va, 1.0, 2.0).unwrap();
        let phi0 = |xi: &[f64]| smoothstep(va.vector_quasi_norm(xi).unwrap() - 1.0);
        for i in (0..g.len()).step_by(7) {
            let xi = g.frequency(i);
            for n in 1..=bank.n_max() {
                let a = va.dilate(2f64.powi(-(n as i32)), &xi).unwrap();
                let b = va.dilate(2f64.powi(-(n as i32) + 1), &xi).unwrap();
                let want = phi0(&a) - phi0(&b);
                assert!((bank.multiplier(n).unwrap()[i] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn apply_and_reconstruct() {
        let g = TorusGrid::new(&[64, 64], &[2.0 * PI, 2.0 * PI]).unwrap();
        let va = aniso_12();
        let bank = FilterBank::build(&g, &va, 1.0, 2.0).unwrap();
        // rho((4, 0)) = 4 = 2^2 exactly: phi_2 = 1, all others 0.
        let e = GridFunction::exponential(g.clone(), &[4, 0]).unwrap();
        for n in 0..=bank.n_max() {
            let s = bank.apply(n, &e).unwrap();
            if n == 2 {
                assert!(s.max_abs_diff(&e).unwrap() < 1e-13);
            } else {
                assert!(s.sup_norm() < 1e-13);
            }
        }
        let c = GridFunction::constant(g.clone(), Complex64::new(2.0, 0.0));
        assert!(bank.apply(0, &c).unwrap().max_abs_diff(&c).unwrap() < 1e-13);

        let limit = bank.coverage_radius();
        let f = random_bandlimited(&g, 8, |_, xi| va.vector_quasi_norm(xi).unwrap() <= limit, 1, true).unwrap();
        let pieces = bank.decompose(&f).unwrap();
        let back = bank.reconstruct(&pieces).unwrap();
        assert!(back.max_abs_diff(&f).unwrap() < 1e-12 * f.sup_norm());
        for n in 0..pieces.len() {
            for m in (n + 2)..pieces.len() {
                assert!(bank.apply(m, &pieces[n]).unwrap().sup_norm() < 1e-12 * f.sup_norm());
            }
        }

        let wide = random_bandlimited(&g, 8, |_, _| true, 1, true).unwrap();
        assert!(matches!(bank.decompose(&wide), Err(Error::CoverageViolation { .. })));
    }

    #[test]
    fn dilation_covariance() {
        let g = TorusGrid::new(&[64, 64], &[2.0 * PI, 2.0 * PI]).unwrap();
        let va = aniso_12();
        let bank = FilterBank::build(&g, &va, 1.0, 2.0).unwrap();
        // Without the zero mode; phi_0 and phi_1(A_2 .) differ only where rho < 1.
        let band = |k: &[i64], _: &[f64]| k[0].abs() <= 6 && k[1].abs() <= 2 && k != [0, 0];
        let f = random_bandlimited(&g, 2, band, 1, true).unwrap();
        let df = dilate_sample(&f, &va, 1).unwrap();
        for n in 1..=bank.n_max() {
            let lhs = bank.apply(n, &df).unwrap();
            let rhs = dilate_sample(&bank.apply(n - 1, &f).unwrap(), &va, 1).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        }
    }

    #[test]
    fn bank_on_sub_axes_ignores_other_coordinates() {
        let g = TorusGrid::new(&[16, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
        let inner = DecomposedAnisotropy::single(Anisotropy::isotropic(1));
        let bank = FilterBank::build_on_axes(&g, &inner, 1..2, 1.0, 2.0).unwrap();
        let e = GridFunction::exponential(g.clone(), &[7, 4]).unwrap();
        assert!(bank.apply(2, &e).unwrap().max_abs_diff(&e).unwrap() < 1e-13);
        assert_eq!(bank.n_max(), 3);
    }

    #[test]
    fn multiplier_export_round_trip() {
        let g = TorusGrid::unit(&[16, 16]).unwrap();
        let bank = FilterBank::build(&g, &aniso_12(), 1.0, 2.0).unwrap();
        let m = bank.multiplier_function(1).unwrap();
        let mut buf = Vec::new();
        crate::grid::io::write_binary(&m, &mut buf).unwrap();
        let back = crate::grid::io::read_binary(&buf[..]).unwrap();
        assert_eq!(back.samples(), m.samples());
    }
}
