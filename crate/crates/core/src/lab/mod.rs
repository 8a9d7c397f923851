//! Verification campaigns: seeded function families, two-sided norm
//! comparisons, and ratio statistics with drift and refinement diagnostics.

mod campaigns;
pub mod presets;
mod report;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anisotropy::{Anisotropy, DecomposedAnisotropy};
use crate::error::{Error, Result};
use crate::grid::{dilate_sample, random_bandlimited, GridFunction, TorusGrid};
use crate::numeric::exponent_serde;
use crate::smoothness::HSampling;
use crate::spaces::SpaceSpec;

pub use campaigns::{
    pairing, run, verify_banks, verify_difference, verify_duality, verify_fubini, verify_intersection,
    verify_lifting, verify_peetre, verify_scaling,
};
pub use report::{equivalence_report, Check, EquivalenceReport, Record, Refinement, StatisticKind, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Intersection,
    Difference,
    Scaling,
    Lifting,
    Fubini,
    Duality,
    Peetre,
    /// Bank independence of the Triebel-Lizorkin quasi-norm.
    Banks,
}

impl Theorem {
    pub const ALL: [Theorem; 8] = [
        Theorem::Intersection,
        Theorem::Difference,
        Theorem::Scaling,
        Theorem::Lifting,
        Theorem::Fubini,
        Theorem::Duality,
        Theorem::Peetre,
        Theorem::Banks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Intersection => "intersection",
            Theorem::Difference => "difference",
            Theorem::Scaling => "scaling",
            Theorem::Lifting => "lifting",
            Theorem::Fubini => "fubini",
            Theorem::Duality => "duality",
            Theorem::Peetre => "peetre",
            Theorem::Banks => "banks",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown theorem '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dims: Vec<usize>,
    /// Angular frequency step per axis; the period is `2 pi / step`.
    /// Defaults to 1 on every axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_step: Option<Vec<f64>>,
}

impl GridConfig {
    pub fn build(&self) -> Result<TorusGrid> {
        let steps = self.frequency_step.clone().unwrap_or_else(|| vec![1.0; self.dims.len()]);
        if steps.len() != self.dims.len() {
            return Err(Error::InvalidParameter(format!(
                "grid.frequency_step: expected {} entries, got {}",
                self.dims.len(),
                steps.len()
            )));
        }
        if steps.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter("grid.frequency_step: entries must be positive".into()));
        }
        let period: Vec<f64> = steps.iter().map(|s| 2.0 * PI / s).collect();
        TorusGrid::new(&self.dims, &period).map_err(|e| Error::InvalidParameter(format!("grid: {e}")))
    }
}

/// One block of the anisotropy: either diagonal exponents or a full matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl BlockConfig {
    pub fn diagonal(exponents: &[f64]) -> Self {
        Self {
            diagonal: Some(exponents.to_vec()),
            matrix: None,
        }
    }

    fn build(&self, j: usize) -> Result<Anisotropy> {
        let field = |e: Error| Error::InvalidParameter(format!("anisotropy.blocks[{j}]: {e}"));
        match (&self.diagonal, &self.matrix) {
            (Some(d), None) => Anisotropy::diagonal(d).map_err(field),
            (None, Some(m)) => Anisotropy::from_rows(m).map_err(field),
            _ => Err(Error::InvalidParameter(format!(
                "anisotropy.blocks[{j}]: give exactly one of 'diagonal' or 'matrix'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnisotropyConfig {
    pub blocks: Vec<BlockConfig>,
}

impl AnisotropyConfig {
    pub fn diagonal_blocks(exponents: &[Vec<f64>]) -> Self {
        Self {
            blocks: exponents.iter().map(|e| BlockConfig::diagonal(e)).collect(),
        }
    }

    pub fn build(&self) -> Result<DecomposedAnisotropy> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| b.build(j))
            .collect::<Result<Vec<_>>>()?;
        DecomposedAnisotropy::new(blocks).map_err(|e| Error::InvalidParameter(format!("anisotropy: {e}")))
    }
}

/// Smoothness and integrability. `p` has one exponent per block and `q` is
/// the sequence exponent; the intersection campaign reads `p = (p, q)` of the
/// mixed space and uses `q` as its sequence exponent `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub s: f64,
    #[serde(with = "exponent_serde::vec")]
    pub p: Vec<f64>,
    #[serde(with = "exponent_serde")]
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl SpaceConfig {
    pub fn spec(&self, va: &DecomposedAnisotropy) -> SpaceSpec {
        let spec = SpaceSpec::f(self.s, &self.p, self.q, va);
        match &self.weights {
            Some(w) => spec.with_weights(w),
            None => spec,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankConfig {
    pub gamma: f64,
    pub delta: f64,
}

impl Default for BankConfig {
    fn default() -> Self {
        Self {
            gamma: crate::filterbank::DEFAULT_GAMMA,
            delta: crate::filterbank::DEFAULT_DELTA,
        }
    }
}

/// Frequency region of the random family members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum BandSpec {
    /// `lo <= rho_vecA(xi) <= hi`.
    Annulus { lo: f64, hi: f64 },
    /// `rho_{A_j}(xi_j) <= radii[j]` for every block.
    Box { radii: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub seed: u64,
    /// Number of random base functions.
    pub count: usize,
    pub band: BandSpec,
    /// Per-axis lower bounds on `|xi_a|`; modes below any bound are left out.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_floor: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub channels: usize,
    #[serde(default = "yes")]
    pub real: bool,
    /// Dyadic dilation exponents `m`; member `f(A_{2^m} x)` for each.
    #[serde(default = "identity_dilation")]
    pub dilations: Vec<i32>,
    /// Lattice frequency shifts; member `e^{i k . x} f` for each.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modulations: Vec<Vec<i64>>,
    /// Append the zero function (it never enters the statistics).
    #[serde(default = "yes")]
    pub include_zero: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn identity_dilation() -> Vec<i32> {
    vec![0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub spread_max: f64,
    pub drift_max: f64,
    pub refinement_max: f64,
    pub exactness_tol: f64,
    pub min_samples: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            spread_max: 8.0,
            drift_max: 0.05,
            refinement_max: 0.15,
            exactness_tol: 1e-10,
            min_samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DifferenceConfig {
    pub order: usize,
    /// Inner exponents of the `h`-average; ones when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    pub sampling: HSampling,
    pub max_scale: usize,
}

impl Default for DifferenceConfig {
    fn default() -> Self {
        Self {
            order: 2,
            phi: None,
            sampling: HSampling::Gauss { order: 4 },
            max_scale: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub lambdas: Vec<f64>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { lambdas: vec![0.5, 2.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiftingConfig {
    pub sigmas: Vec<f64>,
}

impl Default for LiftingConfig {
    fn default() -> Self {
        Self { sigmas: vec![-1.0, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PeetreConfig {
    /// Maximal-function exponents per block; ones when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    /// Band radii per block; taken from a box-shaped family band when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

/// Everything a campaign needs. Sections not used by a campaign are
/// ignored by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub grid: GridConfig,
    pub anisotropy: AnisotropyConfig,
    pub space: SpaceConfig,
    #[serde(default)]
    pub bank: BankConfig,
    pub family: FamilySpec,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Repeat the campaign on the 2x refined grid.
    #[serde(default = "yes")]
    pub refine: bool,
    #[serde(default)]
    pub difference: DifferenceConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub lifting: LiftingConfig,
    #[serde(default)]
    pub peetre: PeetreConfig,
    /// Second bank for the bank-independence campaign.
    #[serde(default = "comparison_bank")]
    pub comparison_bank: BankConfig,
}

fn comparison_bank() -> BankConfig {
    BankConfig { gamma: 1.0, delta: 1.5 }
}

impl LabConfig {
    /// Checks every field that can be checked without computing norms.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        let va = self.anisotropy.build()?;
        if va.dim() != grid.ndim() {
            return Err(Error::InvalidParameter(format!(
                "anisotropy: dimension {} does not match grid dimension {}",
                va.dim(),
                grid.ndim()
            )));
        }
        let blocks = va.num_blocks();
        if self.space.p.len() != blocks {
            return Err(Error::InvalidParameter(format!(
                "space.p: expected {blocks} exponents, got {}",
                self.space.p.len()
            )));
        }
        if self.space.p.iter().any(|&p| !(p > 0.0)) || !(self.space.q > 0.0) || !self.space.s.is_finite() {
            return Err(Error::InvalidParameter("space: exponents must be positive and s finite".into()));
        }
        if let Some(w) = &self.space.weights {
            if w.len() != blocks {
                return Err(Error::InvalidParameter(format!(
                    "space.weights: expected {blocks} exponents, got {}",
                    w.len()
                )));
            }
        }
        for (name, b) in [("bank", self.bank), ("comparison_bank", self.comparison_bank)] {
            if !(b.gamma > 0.0 && b.gamma < b.delta && b.delta.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name}: need 0 < gamma < delta")));
            }
        }
        let fam = &self.family;
        if fam.count == 0 {
            return Err(Error::InvalidParameter("family.count: must be positive".into()));
        }
        if fam.channels == 0 {
            return Err(Error::InvalidParameter("family.channels: must be positive".into()));
        }
        match &fam.band {
            BandSpec::Annulus { lo, hi } => {
                if !(*lo >= 0.0 && lo <= hi && hi.is_finite()) {
                    return Err(Error::InvalidParameter("family.band: need 0 <= lo <= hi < inf".into()));
                }
            }
            BandSpec::Box { radii } => {
                if radii.len() != blocks || radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
                    return Err(Error::InvalidParameter(format!(
                        "family.band.radii: need {blocks} positive radii"
                    )));
                }
            }
        }
        if let Some(fl) = &fam.axis_floor {
            if fl.len() != grid.ndim() {
                return Err(Error::InvalidParameter(format!(
                    "family.axis_floor: expected {} entries, got {}",
                    grid.ndim(),
                    fl.len()
                )));
            }
        }
        if fam.dilations.is_empty() {
            return Err(Error::InvalidParameter("family.dilations: need at least one exponent".into()));
        }
        if fam.dilations.iter().any(|&m| m != 0) && !va.is_diagonal() {
            return Err(Error::InvalidParameter(
                "family.dilations: lattice dilations need a diagonal anisotropy".into(),
            ));
        }
        if fam.modulations.iter().any(|k| k.len() != grid.ndim()) {
            return Err(Error::InvalidParameter(format!(
                "family.modulations: every shift needs {} entries",
                grid.ndim()
            )));
        }
        let t = &self.thresholds;
        if !(t.spread_max >= 1.0 && t.drift_max >= 0.0 && t.refinement_max >= 0.0 && t.exactness_tol >= 0.0) {
            return Err(Error::InvalidParameter("thresholds: bounds must be nonnegative, spread_max >= 1".into()));
        }
        if self.difference.order == 0 || self.difference.max_scale == 0 {
            return Err(Error::InvalidParameter("difference: order and max_scale must be positive".into()));
        }
        if let Some(phi) = &self.difference.phi {
            if phi.len() != blocks {
                return Err(Error::InvalidParameter(format!("difference.phi: expected {blocks} exponents")));
            }
        }
        if self.scaling.lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter("scaling.lambdas: must be positive".into()));
        }
        if self.lifting.sigmas.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("lifting.sigmas: must be finite".into()));
        }
        for (name, v) in [("peetre.r", &self.peetre.r), ("peetre.radii", &self.peetre.radii)] {
            if let Some(v) = v {
                if v.len() != blocks || v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::InvalidParameter(format!("{name}: need {blocks} positive entries")));
                }
            }
        }
        Ok(())
    }

    /// The config with the grid refined twice per axis.
    pub fn refined(&self) -> Self {
        let mut c = self.clone();
        c.grid.dims = c.grid.dims.iter().map(|d| 2 * d).collect();
        c
    }
}

/// A function of the campaign family.
#[derive(Debug, Clone)]
pub struct Member {
    pub id: usize,
    /// Index of the random base function (`count` for the zero member).
    pub base: usize,
    /// Dilation parameter `t = 2^m` (one for modulated members).
    pub t: f64,
    pub label: String,
    pub f: GridFunction,
}

/// Seed of base function `i`.
pub fn member_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x2545_f491_4f6c_dd1d).wrapping_add(i as u64)
}

fn band_predicate<'a>(
    fam: &'a FamilySpec,
    va: &'a DecomposedAnisotropy,
) -> impl Fn(&[i64], &[f64]) -> bool + Sync + 'a {
    move |_k: &[i64], xi: &[f64]| {
        if let Some(fl) = &fam.axis_floor {
            if xi.iter().zip(fl).any(|(x, f)| x.abs() < *f) {
                return false;
            }
        }
        match &fam.band {
            BandSpec::Annulus { lo, hi } => va
                .vector_quasi_norm(xi)
                .map(|r| *lo <= r && r <= *hi)
                .unwrap_or(false),
            BandSpec::Box { radii } => va
                .block_quasi_norms(xi)
                .map(|r| r.iter().zip(radii).all(|(a, b)| a <= b))
                .unwrap_or(false),
        }
    }
}

/// Random base function `i` with an explicit seed.
pub fn base_function(
    grid: &TorusGrid,
    va: &DecomposedAnisotropy,
    fam: &FamilySpec,
    seed: u64,
    i: usize,
) -> Result<GridFunction> {
    random_bandlimited(grid, member_seed(seed, i), band_predicate(fam, va), fam.channels, fam.real)
}

/// The family on `grid`: every base function under every dilation, then
/// every modulation of the undilated base, then (optionally) zero.
pub fn family(grid: &TorusGrid, va: &DecomposedAnisotropy, fam: &FamilySpec) -> Result<Vec<Member>> {
    family_with_seed(grid, va, fam, fam.seed)
}

pub(crate) fn family_with_seed(
    grid: &TorusGrid,
    va: &DecomposedAnisotropy,
    fam: &FamilySpec,
    seed: u64,
) -> Result<Vec<Member>> {
    let bases = (0..fam.count)
        .into_par_iter()
        .map(|i| base_function(grid, va, fam, seed, i))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (i, f) in bases.iter().enumerate() {
        for &m in &fam.dilations {
            let g = if m == 0 { f.clone() } else { dilate_sample(f, va, m)? };
            out.push(Member {
                id: out.len(),
                base: i,
                t: 2f64.powi(m),
                label: format!("dilation[{m}]"),
                f: g,
            });
        }
        for k in &fam.modulations {
            let e = GridFunction::exponential(grid.clone(), k)?;
            let n = grid.len();
            let samples: Vec<Complex64> = f
                .samples()
                .iter()
                .enumerate()
                .map(|(i, v)| v * e.samples()[i % n])
                .collect();
            out.push(Member {
                id: out.len(),
                base: i,
                t: 1.0,
                label: format!("modulation{k:?}"),
                f: GridFunction::new(grid.clone(), f.channels(), samples)?,
            });
        }
    }
    if fam.include_zero {
        out.push(Member {
            id: out.len(),
            base: fam.count,
            t: 1.0,
            label: "zero".into(),
            f: GridFunction::zeros(grid.clone(), fam.channels),
        });
    }
    Ok(out)
}
