//! Uniform periodic sampling of `R^d` by a torus, sampled (multi-channel)
//! functions and their discrete spectra.
//!
//! Transform convention: the forward transform divides by the total number
//! of points, so `f(x) = sum_k c_k exp(i xi_k . x)` with `xi_k = 2 pi k / L`
//! has spectrum `c_k`. Spectra are stored in FFT order: along an axis with
//! `N` points, storage index `i` holds frequency index `k = i` for `i < N/2`
//! and `k = i - N` otherwise.

pub mod io;

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::anisotropy::DecomposedAnisotropy;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// A periodic lattice with `dims[j]` points along an axis of length
/// `period[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    dims: Vec<usize>,
    period: Vec<f64>,
}

impl TorusGrid {
    pub fn new(dims: &[usize], period: &[f64]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidGrid("at least one axis is required".into()));
        }
        if dims.len() != period.len() {
            return Err(Error::InvalidGrid(format!(
                "{} axes but {} periods",
                dims.len(),
                period.len()
            )));
        }
        for &n in dims {
            if n < 2 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!("{n} is not a power of two >= 2")));
            }
        }
        for &l in period {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidGrid(format!("period {l} is not positive")));
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            period: period.to_vec(),
        })
    }

    /// Unit periods on every axis.
    pub fn unit(dims: &[usize]) -> Result<Self> {
        Self::new(dims, &vec![1.0; dims.len()])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn period(&self) -> &[f64] {
        &self.period
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Total number of lattice points.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.dims
            .iter()
            .zip(&self.period)
            .map(|(&n, &l)| l / n as f64)
            .product()
    }

    pub fn volume(&self) -> f64 {
        self.period.iter().product()
    }

    /// Sample spacing along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.period[axis] / self.dims[axis] as f64
    }

    /// Same periods, twice the points per axis.
    pub fn refined(&self) -> Self {
        Self {
            dims: self.dims.iter().map(|n| 2 * n).collect(),
            period: self.period.clone(),
        }
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.ndim()];
        for j in (0..self.ndim().saturating_sub(1)).rev() {
            s[j] = s[j + 1] * self.dims[j + 1];
        }
        s
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.ndim()];
        for j in (0..self.ndim()).rev() {
            idx[j] = flat % self.dims[j];
            flat /= self.dims[j];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Signed frequency index of storage position `i` along `axis`.
    pub fn frequency_index(&self, axis: usize, i: usize) -> i64 {
        let n = self.dims[axis];
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Storage position of signed frequency index `k`, if representable.
    pub fn storage_of_frequency(&self, axis: usize, k: i64) -> Option<usize> {
        let n = self.dims[axis] as i64;
        if k < -n / 2 || k >= n / 2 {
            return None;
        }
        Some(k.rem_euclid(n) as usize)
    }

    /// Signed frequency indices at a flat storage position.
    pub fn frequency_indices(&self, flat: usize) -> Vec<i64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(j, &i)| self.frequency_index(j, i))
            .collect()
    }

    /// Angular frequency `2 pi k / L` at a flat storage position.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        self.frequency_indices(flat)
            .iter()
            .enumerate()
            .map(|(j, &k)| 2.0 * std::f64::consts::PI * k as f64 / self.period[j])
            .collect()
    }

    /// Angular frequency step along `axis`.
    pub fn frequency_step(&self, axis: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.period[axis]
    }

    /// Sample position in `[0, L)`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(j, &i)| i as f64 * self.spacing(j))
            .collect()
    }

    /// Sample position on the centered domain `[-L/2, L/2)`.
    pub fn centered_point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(j, &i)| self.frequency_index(j, i) as f64 * self.spacing(j))
            .collect()
    }

    /// True when some axis sits at the unpaired frequency `-N/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        self.multi_index(flat)
            .iter()
            .zip(&self.dims)
            .any(|(&i, &n)| i == n / 2)
    }
}

/// Per-axis bound on `|k|` for the support of a spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandLimit {
    pub max_index: Vec<u64>,
}

impl BandLimit {
    pub fn contains(&self, k: &[i64]) -> bool {
        k.iter().zip(&self.max_index).all(|(k, m)| k.unsigned_abs() <= *m)
    }
}

/// Samples of a `C^channels`-valued function on a torus grid.
///
/// Samples are stored channel-major: channel `c` occupies
/// `samples[c * len .. (c + 1) * len]` in row-major point order.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: TorusGrid,
    channels: usize,
    samples: Vec<Complex64>,
    spectrum: OnceLock<Vec<Complex64>>,
    band: Option<BandLimit>,
}

impl GridFunction {
    pub fn new(grid: TorusGrid, channels: usize, samples: Vec<Complex64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidParameter("channels must be positive".into()));
        }
        if samples.len() != grid.len() * channels {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * channels,
                got: samples.len(),
            });
        }
        Ok(Self {
            grid,
            channels,
            samples,
            spectrum: OnceLock::new(),
            band: None,
        })
    }

    pub fn from_real(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        Self::new(grid, 1, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(grid: TorusGrid, channels: usize) -> Self {
        let n = grid.len() * channels;
        Self::new(grid, channels, vec![Complex64::new(0.0, 0.0); n]).expect("consistent shape")
    }

    pub fn constant(grid: TorusGrid, value: Complex64) -> Self {
        let n = grid.len();
        let mut f = Self::new(grid, 1, vec![value; n]).expect("consistent shape");
        f.band = Some(BandLimit {
            max_index: vec![0; f.grid.ndim()],
        });
        f
    }

    /// Scalar function from its values at the lattice points `[0, L)`.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> Complex64 + Sync) -> Self {
        let samples: Vec<Complex64> = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.point(i)))
            .collect();
        Self::new(grid, 1, samples).expect("consistent shape")
    }

    /// `exp(i xi_k . x)` for the lattice frequency with indices `k`.
    pub fn exponential(grid: TorusGrid, k: &[i64]) -> Result<Self> {
        if k.len() != grid.ndim() {
            return Err(Error::DimensionMismatch {
                expected: grid.ndim(),
                got: k.len(),
            });
        }
        let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut idx = Vec::with_capacity(k.len());
        for (j, &kj) in k.iter().enumerate() {
            idx.push(grid.storage_of_frequency(j, kj).ok_or_else(|| {
                Error::BandOverflow(format!("frequency index {kj} on axis {j} exceeds the lattice"))
            })?);
        }
        spec[grid.flat_index(&idx)] = Complex64::new(1.0, 0.0);
        let band = BandLimit {
            max_index: k.iter().map(|v| v.unsigned_abs()).collect(),
        };
        let mut f = Self::from_spectrum(grid, 1, spec)?;
        f.band = Some(band);
        Ok(f)
    }

    /// Builds a function from spectral coefficients (same layout as samples).
    pub fn from_spectrum(grid: TorusGrid, channels: usize, spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.len() * channels {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * channels,
                got: spectrum.len(),
            });
        }
        let mut samples = spectrum.clone();
        for c in 0..channels {
            let n = grid.len();
            fft_nd(&mut samples[c * n..(c + 1) * n], grid.dims(), true);
        }
        let f = Self::new(grid, channels, samples)?;
        f.spectrum.set(spectrum).expect("fresh cell");
        Ok(f)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn channel(&self, c: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.samples[c * n..(c + 1) * n]
    }

    pub fn band_limit(&self) -> Option<&BandLimit> {
        self.band.as_ref()
    }

    /// Attaches band metadata after checking it against the spectrum.
    pub fn with_band_limit(mut self, band: BandLimit) -> Result<Self> {
        if band.max_index.len() != self.grid.ndim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.ndim(),
                got: band.max_index.len(),
            });
        }
        let spec = self.spectrum();
        let n = self.grid.len();
        for i in 0..n {
            let k = self.grid.frequency_indices(i);
            if !band.contains(&k) && (0..self.channels).any(|c| spec[c * n + i].norm() > 0.0) {
                return Err(Error::BandOverflow(format!("spectrum is nonzero at {k:?}")));
            }
        }
        self.band = Some(band);
        Ok(self)
    }

    /// Forward transform, computed once.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let n = self.grid.len();
            let mut spec = self.samples.clone();
            let inv = 1.0 / n as f64;
            for c in 0..self.channels {
                let s = &mut spec[c * n..(c + 1) * n];
                fft_nd(s, self.grid.dims(), false);
                for v in s.iter_mut() {
                    *v *= inv;
                }
            }
            spec
        })
    }

    /// Pointwise Euclidean modulus over channels.
    pub fn modulus(&self) -> Vec<f64> {
        let n = self.grid.len();
        if self.channels == 1 {
            return self.samples.iter().map(|v| v.norm()).collect();
        }
        (0..n)
            .map(|i| {
                (0..self.channels)
                    .map(|c| self.samples[c * n + i].norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// Maximum pointwise modulus.
    pub fn sup_norm(&self) -> f64 {
        self.modulus().into_iter().fold(0.0, f64::max)
    }

    /// `sum |f|^2 * cell volume`.
    pub fn energy(&self) -> f64 {
        let sq: Vec<f64> = self.samples.iter().map(|v| v.norm_sqr()).collect();
        pairwise_sum(&sq) * self.grid.cell_volume()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::new(
            self.grid.clone(),
            self.channels,
            self.samples.iter().map(|v| v * c).collect(),
        )
        .expect("same shape");
        out.band = self.band.clone();
        out
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.channels != other.channels {
            return Err(Error::InvalidParameter("functions live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Self::new(
            self.grid.clone(),
            self.channels,
            self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Self::new(
            self.grid.clone(),
            self.channels,
            self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
        )
    }

    /// Largest pointwise difference of samples.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Multiplies the spectrum by a real field (one value per frequency,
    /// shared by all channels).
    pub fn multiply_spectrum(&self, multiplier: &[f64]) -> Result<Self> {
        let n = self.grid.len();
        if multiplier.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: multiplier.len(),
            });
        }
        let spec = self.spectrum();
        let out: Vec<Complex64> = (0..self.channels * n)
            .map(|i| spec[i] * multiplier[i % n])
            .collect();
        let mut f = Self::from_spectrum(self.grid.clone(), self.channels, out)?;
        f.band = self.band.clone();
        Ok(f)
    }

    /// Multiplies the spectrum by `m(flat frequency position)`.
    pub fn map_spectrum(&self, m: impl Fn(usize) -> Complex64 + Sync) -> Self {
        let n = self.grid.len();
        let factors: Vec<Complex64> = (0..n).into_par_iter().map(&m).collect();
        let spec = self.spectrum();
        let out: Vec<Complex64> = (0..self.channels * n)
            .map(|i| spec[i] * factors[i % n])
            .collect();
        let mut f = Self::from_spectrum(self.grid.clone(), self.channels, out).expect("same shape");
        f.band = self.band.clone();
        f
    }

    /// `x -> f(x + z)` for a lattice vector `z` given in sample steps.
    pub fn shift(&self, steps: &[i64]) -> Result<Self> {
        if steps.len() != self.grid.ndim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.ndim(),
                got: steps.len(),
            });
        }
        let n = self.grid.len();
        let dims = self.grid.dims();
        let mut out = vec![Complex64::new(0.0, 0.0); self.samples.len()];
        for i in 0..n {
            let idx = self.grid.multi_index(i);
            let src: Vec<usize> = idx
                .iter()
                .zip(dims)
                .zip(steps)
                .map(|((&a, &nj), &s)| (a as i64 + s).rem_euclid(nj as i64) as usize)
                .collect();
            let si = self.grid.flat_index(&src);
            for c in 0..self.channels {
                out[c * n + i] = self.samples[c * n + si];
            }
        }
        let mut f = Self::new(self.grid.clone(), self.channels, out)?;
        f.band = self.band.clone();
        Ok(f)
    }

    /// Zero-pads (or exactly resamples) the spectrum onto a finer grid with
    /// the same periods. Fails if a nonzero coefficient sits on a Nyquist
    /// position of the coarse grid.
    pub fn resample(&self, target: &TorusGrid) -> Result<Self> {
        if target.period() != self.grid.period() || target.ndim() != self.grid.ndim() {
            return Err(Error::InvalidGrid("resampling requires matching periods".into()));
        }
        let n = self.grid.len();
        let m = target.len();
        let spec = self.spectrum();
        let mut out = vec![Complex64::new(0.0, 0.0); m * self.channels];
        for i in 0..n {
            let nonzero = (0..self.channels).any(|c| spec[c * n + i].norm() > 0.0);
            if !nonzero {
                continue;
            }
            let k = self.grid.frequency_indices(i);
            let mut idx = Vec::with_capacity(k.len());
            for (j, &kj) in k.iter().enumerate() {
                let fits = if target.dims()[j] > self.grid.dims()[j] {
                    kj != -(self.grid.dims()[j] as i64) / 2
                } else {
                    true
                };
                match target.storage_of_frequency(j, kj) {
                    Some(p) if fits => idx.push(p),
                    _ => return Err(Error::BandOverflow(format!("frequency {k:?} does not fit"))),
                }
            }
            let ti = target.flat_index(&idx);
            for c in 0..self.channels {
                out[c * m + ti] = spec[c * n + i];
            }
        }
        let mut f = Self::from_spectrum(target.clone(), self.channels, out)?;
        f.band = self.band.clone();
        Ok(f)
    }
}

thread_local! {
    static PLANNER: std::cell::RefCell<FftPlanner<f64>> = std::cell::RefCell::new(FftPlanner::new());
}

/// Lines gathered per batch on strided axes.
const FFT_BATCH: usize = 64;

/// In-place unnormalized multi-dimensional FFT over a row-major array.
fn fft_nd(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let total: usize = dims.iter().product();
    let mut stride = total;
    for &n in dims {
        stride /= n;
        let fft = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            if inverse {
                p.plan_fft_inverse(n)
            } else {
                p.plan_fft_forward(n)
            }
        });
        if stride == 1 {
            fft.process(data);
            continue;
        }
        // Gather up to FFT_BATCH neighbouring lines into contiguous rows,
        // transform them in one call and scatter back.
        let block = n * stride;
        let batch = FFT_BATCH.min(stride);
        let mut buf = vec![Complex64::new(0.0, 0.0); n * batch];
        for outer in (0..total).step_by(block) {
            for first in (0..stride).step_by(batch) {
                let width = batch.min(stride - first);
                for i in 0..n {
                    let row = &data[outer + i * stride + first..outer + i * stride + first + width];
                    for (j, v) in row.iter().enumerate() {
                        buf[j * n + i] = *v;
                    }
                }
                fft.process(&mut buf[..n * width]);
                for i in 0..n {
                    let row = &mut data[outer + i * stride + first..outer + i * stride + first + width];
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = buf[j * n + i];
                    }
                }
            }
        }
    }
}

/// `rho_vecA(xi)` at every lattice frequency, in spectral storage order.
pub fn frequency_quasi_norm_field(grid: &TorusGrid, va: &DecomposedAnisotropy) -> Result<Vec<f64>> {
    if va.dim() != grid.ndim() {
        return Err(Error::DimensionMismatch {
            expected: grid.ndim(),
            got: va.dim(),
        });
    }
    (0..grid.len())
        .into_par_iter()
        .map(|i| va.vector_quasi_norm(&grid.frequency(i)))
        .collect()
}

/// Seeded band-limited random function.
///
/// Every frequency `k` with `band(k, xi_k)` true receives a standard complex
/// normal coefficient drawn from a generator keyed by `(seed, k)`, so the
/// same seed and band give the same function on any grid that resolves the
/// band. Nyquist frequencies are never used. With `real = true` the spectrum
/// is Hermitian and every channel is real-valued.
pub fn random_bandlimited(
    grid: &TorusGrid,
    seed: u64,
    band: impl Fn(&[i64], &[f64]) -> bool + Sync,
    channels: usize,
    real: bool,
) -> Result<GridFunction> {
    if channels == 0 {
        return Err(Error::InvalidParameter("channels must be positive".into()));
    }
    let n = grid.len();
    let mut spec = vec![Complex64::new(0.0, 0.0); n * channels];
    let mut max_index = vec![0u64; grid.ndim()];
    let mut any = false;
    for i in 0..n {
        if grid.is_nyquist(i) {
            continue;
        }
        let k = grid.frequency_indices(i);
        if !band(&k, &grid.frequency(i)) {
            continue;
        }
        any = true;
        for (m, kj) in max_index.iter_mut().zip(&k) {
            *m = (*m).max(kj.unsigned_abs());
        }
        for c in 0..channels {
            let value = if real {
                // Draw for the canonical member of {k, -k} and conjugate the other.
                let neg: Vec<i64> = k.iter().map(|v| -v).collect();
                if k.iter().all(|&v| v == 0) {
                    Complex64::new(coefficient(seed, c, &k).re * std::f64::consts::SQRT_2, 0.0)
                } else if k > neg {
                    coefficient(seed, c, &k)
                } else {
                    coefficient(seed, c, &neg).conj()
                }
            } else {
                coefficient(seed, c, &k)
            };
            spec[c * n + i] = value;
        }
    }
    if !any {
        return Err(Error::EmptyBand);
    }
    if real {
        // The band predicate need not be symmetric; keep only paired modes.
        for i in 0..n {
            if spec[i].norm() == 0.0 {
                continue;
            }
            let k = grid.frequency_indices(i);
            let idx: Vec<usize> = k
                .iter()
                .enumerate()
                .map(|(j, &kj)| grid.storage_of_frequency(j, -kj).expect("non-Nyquist"))
                .collect();
            if spec[grid.flat_index(&idx)].norm() == 0.0 {
                for c in 0..channels {
                    spec[c * n + i] = Complex64::new(0.0, 0.0);
                }
            }
        }
        if spec.iter().all(|v| v.norm() == 0.0) {
            return Err(Error::EmptyBand);
        }
    }
    let mut f = GridFunction::from_spectrum(grid.clone(), channels, spec)?;
    f.band = Some(BandLimit { max_index });
    if real {
        for v in f.samples.iter_mut() {
            v.im = 0.0;
        }
    }
    Ok(f)
}

fn coefficient(seed: u64, channel: usize, k: &[i64]) -> Complex64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    h = splitmix(h ^ channel as u64);
    for &v in k {
        h = splitmix(h ^ (v as u64));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    let re: f64 = StandardNormal.sample(&mut rng);
    let im: f64 = StandardNormal.sample(&mut rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `x -> f(A_t x)` with `t = 2^m`, realized by re-indexing the spectrum.
///
/// Requires every block of `va` to be diagonal and every nonzero frequency
/// index to map to an integer index `2^{m a_j} k_j` strictly inside the
/// lattice.
pub fn dilate_sample(f: &GridFunction, va: &DecomposedAnisotropy, m: i32) -> Result<GridFunction> {
    let grid = f.grid();
    if va.dim() != grid.ndim() {
        return Err(Error::DimensionMismatch {
            expected: grid.ndim(),
            got: va.dim(),
        });
    }
    let exps = va
        .diagonal_exponents()
        .ok_or_else(|| Error::NotLatticeCompatible("dilate_sample needs diagonal anisotropies".into()))?;
    if m == 0 {
        return Ok(f.clone());
    }
    let factors: Vec<f64> = exps.iter().map(|a| 2f64.powf(m as f64 * a)).collect();
    let n = grid.len();
    let ch = f.channels();
    let spec = f.spectrum();
    let mut out = vec![Complex64::new(0.0, 0.0); n * ch];
    let mut max_index = vec![0u64; grid.ndim()];
    for i in 0..n {
        if (0..ch).all(|c| spec[c * n + i].norm() == 0.0) {
            continue;
        }
        let k = grid.frequency_indices(i);
        let mut idx = Vec::with_capacity(k.len());
        for (j, &kj) in k.iter().enumerate() {
            let target = factors[j] * kj as f64;
            let rounded = target.round();
            if (target - rounded).abs() > 1e-9 * target.abs().max(1.0) {
                return Err(Error::NotLatticeCompatible(format!(
                    "frequency index {kj} on axis {j} maps to {target}"
                )));
            }
            let kk = rounded as i64;
            let half = grid.dims()[j] as i64 / 2;
            if kk.abs() >= half {
                return Err(Error::BandOverflow(format!(
                    "frequency index {kj} on axis {j} maps to {kk}, outside (-{half}, {half})"
                )));
            }
            max_index[j] = max_index[j].max(kk.unsigned_abs());
            idx.push(grid.storage_of_frequency(j, kk).expect("checked range"));
        }
        let ti = grid.flat_index(&idx);
        for c in 0..ch {
            out[c * n + ti] = spec[c * n + i];
        }
    }
    let mut g = GridFunction::from_spectrum(grid.clone(), ch, out)?;
    g.band = Some(BandLimit { max_index });
    Ok(g)
}

#[cfg(test)]
mod tests;
