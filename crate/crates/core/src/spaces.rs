//! Triebel-Lizorkin, Besov and lattice-valued quasi-norms computed from
//! Littlewood-Paley pieces, plus the lifting operator.

use serde::{Deserialize, Serialize};

use crate::anisotropy::DecomposedAnisotropy;
use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::grid::GridFunction;
use crate::mixed_norm::{self, WeightField};
use crate::numeric::{exponent_serde, lp_aggregate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    /// `L_p[l_q^s]`.
    F,
    /// `l_q^s[L_p]`.
    B,
    /// `L_q(outer)[L_p(inner)[l_r^s]]` with filters on the outer block(s).
    ScriptF,
    /// `L_q(outer)[F_{p,r}^s(inner)]` with filters on the inner block(s).
    LqOfInner,
}

/// Parameters identifying one quasi-norm.
///
/// For `F` and `B`, `p` has one exponent per block of `decomposition` and
/// `anisotropy` covers the whole grid. For `ScriptF` and `LqOfInner`, `p`
/// holds the exponents of the inner blocks (the leading `p.len()` blocks),
/// `q` is the exponent of every outer block, `r` is the sequence exponent,
/// and `anisotropy` describes the filtered coordinates only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    pub s: f64,
    #[serde(with = "exponent_serde::vec")]
    pub p: Vec<f64>,
    #[serde(with = "exponent_serde")]
    pub q: f64,
    #[serde(with = "exponent_serde::option", default)]
    pub r: Option<f64>,
    pub decomposition: Vec<usize>,
    /// Block matrices, row by row.
    pub anisotropy: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

/// Row-wise description of every block of `va`.
pub fn describe_anisotropy(va: &DecomposedAnisotropy) -> Vec<Vec<Vec<f64>>> {
    va.blocks()
        .iter()
        .map(|b| {
            let m = b.matrix();
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect()
        })
        .collect()
}

impl SpaceSpec {
    pub fn f(s: f64, p: &[f64], q: f64, va: &DecomposedAnisotropy) -> Self {
        Self {
            kind: SpaceKind::F,
            s,
            p: p.to_vec(),
            q,
            r: None,
            decomposition: va.decomposition().to_vec(),
            anisotropy: describe_anisotropy(va),
            weights: None,
        }
    }

    pub fn b(s: f64, p: &[f64], q: f64, va: &DecomposedAnisotropy) -> Self {
        Self {
            kind: SpaceKind::B,
            ..Self::f(s, p, q, va)
        }
    }

    /// Lattice-valued space with filters (anisotropy `filtered`) on the outer
    /// blocks of `decomposition`.
    pub fn script_f(
        s: f64,
        p_inner: &[f64],
        q_outer: f64,
        r: f64,
        decomposition: &[usize],
        filtered: &DecomposedAnisotropy,
    ) -> Self {
        Self {
            kind: SpaceKind::ScriptF,
            s,
            p: p_inner.to_vec(),
            q: q_outer,
            r: Some(r),
            decomposition: decomposition.to_vec(),
            anisotropy: describe_anisotropy(filtered),
            weights: None,
        }
    }

    /// `L_q(outer; F^s_{p,r}(inner))` with filters (anisotropy `filtered`) on
    /// the inner blocks.
    pub fn lq_of_inner(
        s: f64,
        p_inner: &[f64],
        q_outer: f64,
        r: f64,
        decomposition: &[usize],
        filtered: &DecomposedAnisotropy,
    ) -> Self {
        Self {
            kind: SpaceKind::LqOfInner,
            ..Self::script_f(s, p_inner, q_outer, r, decomposition, filtered)
        }
    }

    pub fn with_weights(mut self, exponents: &[f64]) -> Self {
        self.weights = Some(exponents.to_vec());
        self
    }

    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0;
        if !self.p.iter().all(|&v| positive(v)) || !positive(self.q) || !self.r.is_none_or(positive) {
            return Err(Error::InvalidParameter(format!(
                "exponents must be positive: p = {:?}, q = {}, r = {:?}",
                self.p, self.q, self.r
            )));
        }
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter("smoothness must be finite".into()));
        }
        match self.kind {
            SpaceKind::F | SpaceKind::B => {
                if self.p.len() != self.decomposition.len() {
                    return Err(Error::DimensionMismatch {
                        expected: self.decomposition.len(),
                        got: self.p.len(),
                    });
                }
            }
            SpaceKind::ScriptF | SpaceKind::LqOfInner => {
                if self.r.is_none() {
                    return Err(Error::InvalidParameter("sequence exponent r is required".into()));
                }
                if self.p.is_empty() || self.p.len() >= self.decomposition.len() {
                    return Err(Error::InvalidParameter(format!(
                        "inner/outer split needs 1..{} inner blocks, got {}",
                        self.decomposition.len(),
                        self.p.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exponent of every block, inner blocks first.
    pub fn block_exponents(&self) -> Vec<f64> {
        match self.kind {
            SpaceKind::F | SpaceKind::B => self.p.clone(),
            _ => {
                let mut e = self.p.clone();
                e.resize(self.decomposition.len(), self.q);
                e
            }
        }
    }

    /// Number of grid axes in the inner blocks.
    pub fn inner_axes(&self) -> usize {
        self.decomposition[..self.p.len()].iter().sum()
    }
}

/// A computed quasi-norm with per-scale diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub spec: SpaceSpec,
    pub value: f64,
    /// `2^{ns}` times the mixed norm of the `n`-th piece. For Besov norms the
    /// value is the `l_q` norm of these numbers.
    pub pieces: Vec<f64>,
    pub bank_id: String,
}

impl NormValue {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_bank(spec: &SpaceSpec, bank: &FilterBank, axes: std::ops::Range<usize>) -> Result<()> {
    if describe_anisotropy(bank.anisotropy()) != spec.anisotropy {
        return Err(Error::InvalidParameter("bank anisotropy differs from the space anisotropy".into()));
    }
    if bank.axes() != axes {
        return Err(Error::InvalidParameter(format!(
            "bank acts on axes {:?}, the space filters axes {:?}",
            bank.axes(),
            axes
        )));
    }
    let total: usize = spec.decomposition.iter().sum();
    if total != bank.grid().ndim() {
        return Err(Error::DimensionMismatch {
            expected: bank.grid().ndim(),
            got: total,
        });
    }
    Ok(())
}

fn weight_field(spec: &SpaceSpec, bank: &FilterBank) -> Result<Option<WeightField>> {
    let Some(w) = &spec.weights else {
        return Ok(None);
    };
    if bank.axes() != (0..bank.grid().ndim()) {
        return Err(Error::InvalidParameter(
            "weights are supported only when the anisotropy covers every axis".into(),
        ));
    }
    let field = WeightField::power(bank.grid(), bank.anisotropy(), w)?;
    let r = spec.r.unwrap_or(1.0);
    Ok(Some(field.with_inner_exponents(&vec![r; w.len()])?))
}

struct Pieces {
    moduli: Vec<Vec<f64>>,
    per_scale: Vec<f64>,
}

fn pieces(f: &GridFunction, spec: &SpaceSpec, bank: &FilterBank, weight: Option<&WeightField>) -> Result<Pieces> {
    let parts = bank.decompose(f)?;
    let exps = spec.block_exponents();
    let moduli: Vec<Vec<f64>> = parts.iter().map(GridFunction::modulus).collect();
    let per_scale = moduli
        .iter()
        .enumerate()
        .map(|(n, m)| {
            Ok(2f64.powf(n as f64 * spec.s)
                * mixed_norm::mixed_lp_field(bank.grid(), m, &exps, &spec.decomposition, weight)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Pieces { moduli, per_scale })
}

fn expect_kind(spec: &SpaceSpec, kind: SpaceKind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(Error::InvalidParameter(format!("expected a {kind:?} space, got {:?}", spec.kind)));
    }
    Ok(())
}

/// Triebel-Lizorkin quasi-norm `||(2^{ns} S_n f)_n||_{L_p[l_q]}`.
pub fn tl_norm(f: &GridFunction, spec: &SpaceSpec, bank: &FilterBank) -> Result<NormValue> {
    expect_kind(spec, SpaceKind::F)?;
    check_bank(spec, bank, 0..bank.grid().ndim())?;
    let w = weight_field(spec, bank)?;
    let pc = pieces(f, spec, bank, w.as_ref())?;
    let value = mixed_norm::seq_norm_f(bank.grid(), &pc.moduli, spec.s, &spec.p, spec.q, &spec.decomposition, w.as_ref())?;
    Ok(NormValue {
        spec: spec.clone(),
        value,
        pieces: pc.per_scale,
        bank_id: bank.id(),
    })
}

/// Besov quasi-norm `||(2^{ns} S_n f)_n||_{l_q[L_p]}`.
pub fn besov_norm(f: &GridFunction, spec: &SpaceSpec, bank: &FilterBank) -> Result<NormValue> {
    expect_kind(spec, SpaceKind::B)?;
    check_bank(spec, bank, 0..bank.grid().ndim())?;
    let w = weight_field(spec, bank)?;
    let pc = pieces(f, spec, bank, w.as_ref())?;
    let value = lp_aggregate(&pc.per_scale, spec.q, 1.0);
    Ok(NormValue {
        spec: spec.clone(),
        value,
        pieces: pc.per_scale,
        bank_id: bank.id(),
    })
}

fn lattice_valued(
    f: &GridFunction,
    spec: &SpaceSpec,
    bank: &FilterBank,
    axes: std::ops::Range<usize>,
    exchanged: bool,
) -> Result<NormValue> {
    check_bank(spec, bank, axes)?;
    if spec.weights.is_some() {
        return Err(Error::InvalidParameter(
            "weights are supported only when the anisotropy covers every axis".into(),
        ));
    }
    let pc = pieces(f, spec, bank, None)?;
    let r = spec.r.expect("validated");
    let agg = if exchanged {
        mixed_norm::seq_norm_script_f_exchanged
    } else {
        mixed_norm::seq_norm_script_f
    };
    let value = agg(bank.grid(), &pc.moduli, spec.s, spec.q, r, &spec.p, &spec.decomposition, None)?;
    Ok(NormValue {
        spec: spec.clone(),
        value,
        pieces: pc.per_scale,
        bank_id: bank.id(),
    })
}

/// `||(2^{ns} S_n f)_n||_{L_q(outer)[L_p(inner)[l_r]]}` with `bank` acting
/// on the outer coordinates.
pub fn script_f_norm(f: &GridFunction, spec: &SpaceSpec, bank_outer: &FilterBank) -> Result<NormValue> {
    expect_kind(spec, SpaceKind::ScriptF)?;
    let axes = spec.inner_axes()..bank_outer.grid().ndim();
    lattice_valued(f, spec, bank_outer, axes, false)
}

/// Order-exchanged partner `L_q(outer)[l_r[L_p(inner)]]` of
/// [`script_f_norm`]; the two coincide when `r` equals the inner exponents.
pub fn script_f_norm_exchanged(f: &GridFunction, spec: &SpaceSpec, bank_outer: &FilterBank) -> Result<NormValue> {
    expect_kind(spec, SpaceKind::ScriptF)?;
    let axes = spec.inner_axes()..bank_outer.grid().ndim();
    lattice_valued(f, spec, bank_outer, axes, true)
}

/// `L_q` over the outer coordinates of the inner Triebel-Lizorkin norm of
/// each slice, with `bank_inner` acting on the inner coordinates.
pub fn lq_of_inner_norm(f: &GridFunction, spec: &SpaceSpec, bank_inner: &FilterBank) -> Result<NormValue> {
    expect_kind(spec, SpaceKind::LqOfInner)?;
    lattice_valued(f, spec, bank_inner, 0..spec.inner_axes(), false)
}

/// Dispatches on `spec.kind`.
pub fn norm(f: &GridFunction, spec: &SpaceSpec, bank: &FilterBank) -> Result<NormValue> {
    match spec.kind {
        SpaceKind::F => tl_norm(f, spec, bank),
        SpaceKind::B => besov_norm(f, spec, bank),
        SpaceKind::ScriptF => script_f_norm(f, spec, bank),
        SpaceKind::LqOfInner => lq_of_inner_norm(f, spec, bank),
    }
}

/// Symbol of the lifting operator: `rho` for `rho >= 1`, and the C^1
/// completion `(1 + rho^2) / 2` (values in `[1/2, 1]`) below.
pub fn lift_symbol(rho: f64) -> f64 {
    if rho >= 1.0 {
        rho
    } else {
        0.5 * (1.0 + rho * rho)
    }
}

/// Multiplies the spectrum by `lift_symbol(rho_vecA(xi))^sigma`.
pub fn lift(f: &GridFunction, sigma: f64, va: &DecomposedAnisotropy) -> Result<GridFunction> {
    let rho = crate::grid::frequency_quasi_norm_field(f.grid(), va)?;
    lift_with_rho(f, sigma, &rho)
}

/// [`lift`] with a precomputed quasi-norm field (e.g. [`FilterBank::rho`]).
pub fn lift_with_rho(f: &GridFunction, sigma: f64, rho: &[f64]) -> Result<GridFunction> {
    if sigma == 0.0 {
        return Ok(f.clone());
    }
    let m: Vec<f64> = rho.iter().map(|&r| lift_symbol(r).powf(sigma)).collect();
    f.multiply_spectrum(&m)
}
