//! One function per campaign. Each builds its family on the configured grid,
//! computes both sides per member in parallel and reduces to reports; the
//! `verify_*` wrappers repeat the run on the refined grid when asked.

use num_complex::Complex64;
use rayon::prelude::*;

use super::report::{equivalence_report, EquivalenceReport, Record, StatisticKind};
use super::{family, family_with_seed, BandSpec, BankConfig, LabConfig, Member, Theorem};
use crate::anisotropy::{Anisotropy, DecomposedAnisotropy};
use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::grid::{GridFunction, TorusGrid};
use crate::numeric::{pairwise_sum, rel_diff};
use crate::smoothness::{difference_norm, maximal, peetre_maximal, BallShape, DifferenceProfile};
use crate::spaces::{
    lift_with_rho, lq_of_inner_norm, script_f_norm, script_f_norm_exchanged, tl_norm, besov_norm, SpaceSpec,
};

/// Seed offset of the second function of each duality pair.
const PAIR_SEED_OFFSET: u64 = 0x5bd1_e995;

struct Setup {
    grid: TorusGrid,
    va: DecomposedAnisotropy,
}

fn setup(cfg: &LabConfig) -> Result<Setup> {
    cfg.validate()?;
    Ok(Setup {
        grid: cfg.grid.build()?,
        va: cfg.anisotropy.build()?,
    })
}

fn bank(grid: &TorusGrid, va: &DecomposedAnisotropy, b: BankConfig) -> Result<FilterBank> {
    FilterBank::build(grid, va, b.gamma, b.delta)
}

/// Evaluates `sides` on every member, in parallel, in member order.
fn records(members: &[Member], sides: impl Fn(&Member) -> Result<(f64, f64)> + Sync) -> Result<Vec<Record>> {
    members
        .par_iter()
        .map(|m| {
            let (lhs, rhs) = sides(m)?;
            Ok(Record::new(m.id, m.base, m.t, m.label.clone(), lhs, rhs))
        })
        .collect()
}

fn report(
    id: impl Into<String>,
    kind: StatisticKind,
    cfg: &LabConfig,
    records: Vec<Record>,
) -> Result<EquivalenceReport> {
    equivalence_report(id, kind, &cfg.grid.dims, records, cfg.thresholds)
}

/// Runs `campaign` on the configured grid and, with `cfg.refine`, on the
/// refined grid, attaching the refined statistic report by report.
fn with_refinement(
    cfg: &LabConfig,
    campaign: impl Fn(&LabConfig) -> Result<Vec<EquivalenceReport>>,
) -> Result<Vec<EquivalenceReport>> {
    let mut coarse = campaign(cfg)?;
    if cfg.refine {
        let fine = campaign(&cfg.refined())?;
        for (c, f) in coarse.iter_mut().zip(&fine) {
            c.attach_refinement(f);
        }
    }
    Ok(coarse)
}

/// Runs one campaign, refinement included.
pub fn run(theorem: Theorem, cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    match theorem {
        Theorem::Intersection => verify_intersection(cfg),
        Theorem::Difference => verify_difference(cfg),
        Theorem::Scaling => verify_scaling(cfg),
        Theorem::Lifting => verify_lifting(cfg),
        Theorem::Fubini => verify_fubini(cfg),
        Theorem::Duality => verify_duality(cfg),
        Theorem::Peetre => verify_peetre(cfg),
        Theorem::Banks => verify_banks(cfg),
    }
}

fn open_unit_interval_exponent(name: &str, v: f64) -> Result<()> {
    if v > 1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterWindow(format!("{name} must lie in (1, inf), got {v}")))
    }
}

/// `a` with `A = a I`, if the block is a multiple of the identity.
fn scalar_exponent(block: &Anisotropy) -> Option<f64> {
    let d = block.diagonal_entries()?;
    let a = d[0];
    d.iter().all(|&v| v == a).then_some(a)
}

/// Ratio of the two-block norm to the sum of its two single-block pieces:
/// the outer lattice-valued norm with smoothness `s/b` and the `L_q` norm of
/// the inner norm with smoothness `s/a`, both with isotropic filters.
///
/// The space section reads `p = (p, q)` and its sequence exponent as `r`.
pub fn verify_intersection(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    with_refinement(cfg, intersection)
}

fn intersection(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    let Setup { grid, va } = setup(cfg)?;
    if va.num_blocks() != 2 {
        return Err(Error::ParameterWindow(format!(
            "intersection needs two blocks, got {}",
            va.num_blocks()
        )));
    }
    let (a, b) = match (scalar_exponent(va.block(0)), scalar_exponent(va.block(1))) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::ParameterWindow(
                "intersection needs blocks of the form a I and b I".into(),
            ))
        }
    };
    let sp = &cfg.space;
    let (p, q, r, s) = (sp.p[0], sp.p[1], sp.q, sp.s);
    open_unit_interval_exponent("p", p)?;
    open_unit_interval_exponent("q", q)?;
    open_unit_interval_exponent("r", r)?;
    if !(s > 0.0) {
        return Err(Error::ParameterWindow(format!("s must be positive, got {s}")));
    }
    if sp.weights.is_some() {
        return Err(Error::ParameterWindow("intersection does not take weights".into()));
    }
    let decomposition = va.decomposition().to_vec();
    let (d1, d) = (decomposition[0], va.dim());
    let inner_iso = DecomposedAnisotropy::isotropic(&[d1]);
    let outer_iso = DecomposedAnisotropy::isotropic(&[d - d1]);
    let full_bank = bank(&grid, &va, cfg.bank)?;
    let outer_bank = FilterBank::build_on_axes(&grid, &outer_iso, d1..d, cfg.bank.gamma, cfg.bank.delta)?;
    let inner_bank = FilterBank::build_on_axes(&grid, &inner_iso, 0..d1, cfg.bank.gamma, cfg.bank.delta)?;
    let full = SpaceSpec::f(s, &[p, q], r, &va);
    let outer = SpaceSpec::script_f(s / b, &[p], q, r, &decomposition, &outer_iso);
    let inner = SpaceSpec::lq_of_inner(s / a, &[p], q, r, &decomposition, &inner_iso);
    let members = family(&grid, &va, &cfg.family)?;
    let check_fubini = r == p;
    let rows: Vec<(Record, f64)> = members
        .par_iter()
        .map(|m| {
            let lhs = tl_norm(&m.f, &full, &full_bank)?.value;
            let outer_value = script_f_norm(&m.f, &outer, &outer_bank)?.value;
            let inner_value = lq_of_inner_norm(&m.f, &inner, &inner_bank)?.value;
            let exchange = if check_fubini {
                rel_diff(outer_value, script_f_norm_exchanged(&m.f, &outer, &outer_bank)?.value)
            } else {
                0.0
            };
            Ok((
                Record::new(m.id, m.base, m.t, m.label.clone(), lhs, outer_value + inner_value),
                exchange,
            ))
        })
        .collect::<Result<_>>()?;
    let exchange = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut rep = report(
        Theorem::Intersection.name(),
        StatisticKind::Interval,
        cfg,
        rows.into_iter().map(|r| r.0).collect(),
    )?;
    if check_fubini {
        rep.add_check("order exchange at r = p", exchange, cfg.thresholds.exactness_tol);
    }
    Ok(vec![rep])
}

/// Ratio of the ball-averaged difference norm to the Triebel-Lizorkin norm.
pub fn verify_difference(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    with_refinement(cfg, difference)
}

fn difference(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    let Setup { grid, va } = setup(cfg)?;
    let spec = cfg.space.spec(&va);
    let dc = &cfg.difference;
    let profile = DifferenceProfile {
        order: dc.order,
        shape: BallShape::QuasiNorm(va.clone()),
        phi: dc.phi.clone().unwrap_or_else(|| vec![1.0; va.num_blocks()]),
        sampling: dc.sampling,
    };
    crate::smoothness::validate_window(&spec, &profile)?;
    let b = bank(&grid, &va, cfg.bank)?;
    let members = family(&grid, &va, &cfg.family)?;
    let recs = records(&members, |m| {
        let lhs = difference_norm(&m.f, &spec, &profile, 1..=dc.max_scale)?.value;
        let rhs = tl_norm(&m.f, &spec, &b)?.value;
        Ok((lhs, rhs))
    })?;
    Ok(vec![report(Theorem::Difference.name(), StatisticKind::Interval, cfg, recs)?])
}

/// `||f||_{F^s(A)} / ||f||_{F^{lambda s}(lambda A)}`, one report per lambda.
pub fn verify_scaling(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    with_refinement(cfg, scaling)
}

fn scaling(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    let Setup { grid, va } = setup(cfg)?;
    let spec = cfg.space.spec(&va);
    let b = bank(&grid, &va, cfg.bank)?;
    let members = family(&grid, &va, &cfg.family)?;
    let base: Vec<f64> = members
        .par_iter()
        .map(|m| Ok(tl_norm(&m.f, &spec, &b)?.value))
        .collect::<Result<_>>()?;
    cfg.scaling
        .lambdas
        .iter()
        .map(|&lambda| {
            let scaled_va = va.scaled(lambda)?;
            let mut scaled = SpaceSpec::f(lambda * spec.s, &spec.p, spec.q, &scaled_va);
            if let Some(w) = &spec.weights {
                scaled = scaled.with_weights(&w.iter().map(|g| lambda * g).collect::<Vec<_>>());
            }
            let scaled_bank = bank(&grid, &scaled_va, cfg.bank)?;
            let recs = records(&members, |m| Ok((base[m.id], tl_norm(&m.f, &scaled, &scaled_bank)?.value)))?;
            report(format!("scaling[lambda={lambda}]"), StatisticKind::Interval, cfg, recs)
        })
        .collect()
}

/// `||I_sigma f||_{F^s} / ||f||_{F^{s+sigma}}`, one report per sigma, with a
/// round-trip check `I_{-sigma} I_sigma f = f`.
pub fn verify_lifting(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    with_refinement(cfg, lifting)
}

fn lifting(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    let Setup { grid, va } = setup(cfg)?;
    let spec = cfg.space.spec(&va);
    let b = bank(&grid, &va, cfg.bank)?;
    let members = family(&grid, &va, &cfg.family)?;
    cfg.lifting
        .sigmas
        .iter()
        .map(|&sigma| {
            let shifted = spec.with_s(spec.s + sigma);
            let rows: Vec<(Record, f64)> = members
                .par_iter()
                .map(|m| {
                    let lifted = lift_with_rho(&m.f, sigma, b.rho())?;
                    let back = lift_with_rho(&lifted, -sigma, b.rho())?;
                    let scale = m.f.sup_norm();
                    let trip = if scale > 0.0 { back.max_abs_diff(&m.f)? / scale } else { 0.0 };
                    let lhs = tl_norm(&lifted, &spec, &b)?.value;
                    let rhs = tl_norm(&m.f, &shifted, &b)?.value;
                    Ok((Record::new(m.id, m.base, m.t, m.label.clone(), lhs, rhs), trip))
                })
                .collect::<Result<_>>()?;
            let trip = rows.iter().map(|r| r.1).fold(0.0, f64::max);
            let mut rep = report(
                format!("lifting[sigma={sigma}]"),
                StatisticKind::Interval,
                cfg,
                rows.into_iter().map(|r| r.0).collect(),
            )?;
            rep.add_check("round trip", trip, 1e-12);
            Ok(rep)
        })
        .collect()
}

/// Exactness of the order exchanges at equal exponents: `F = B` at
/// `p = (q, .., q)`, and the lattice-valued norm against its exchanged
/// partner at `r = p`. Never refined.
pub fn verify_fubini(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    let Setup { grid, va } = setup(cfg)?;
    let sp = &cfg.space;
    if sp.p.iter().any(|&p| p != sp.q) {
        return Err(Error::ParameterWindow(format!(
            "fubini needs every p equal to q, got p = {:?}, q = {}",
            sp.p, sp.q
        )));
    }
    let f_spec = sp.spec(&va);
    let b_spec = SpaceSpec {
        kind: crate::spaces::SpaceKind::B,
        ..f_spec.clone()
    };
    let b = bank(&grid, &va, cfg.bank)?;
    let members = family(&grid, &va, &cfg.family)?;
    let recs = records(&members, |m| {
        Ok((tl_norm(&m.f, &f_spec, &b)?.value, besov_norm(&m.f, &b_spec, &b)?.value))
    })?;
    let mut out = vec![report("fubini[f=b]", StatisticKind::Exactness, cfg, recs)?];
    if va.num_blocks() == 2 {
        // First block inner, second filtered.
        let decomposition = va.decomposition().to_vec();
        let d1 = decomposition[0];
        let outer_va = DecomposedAnisotropy::new(va.blocks()[1..].to_vec())?;
        let outer_bank = FilterBank::build_on_axes(&grid, &outer_va, d1..va.dim(), cfg.bank.gamma, cfg.bank.delta)?;
        let spec = SpaceSpec::script_f(sp.s, &[sp.p[0]], sp.p[1], sp.p[0], &decomposition, &outer_va);
        let recs = records(&members, |m| {
            Ok((
                script_f_norm(&m.f, &spec, &outer_bank)?.value,
                script_f_norm_exchanged(&m.f, &spec, &outer_bank)?.value,
            ))
        })?;
        out.push(report("fubini[script_f]", StatisticKind::Exactness, cfg, recs)?);
    }
    Ok(out)
}

/// `<f, g> = sum_c int f_c conj(g_c)`.
pub fn pairing(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    if f.grid() != g.grid() || f.channels() != g.channels() {
        return Err(Error::InvalidParameter("pairing needs a common grid and channel count".into()));
    }
    let prods: Vec<Complex64> = f.samples().iter().zip(g.samples()).map(|(a, b)| a * b.conj()).collect();
    let re: Vec<f64> = prods.iter().map(|z| z.re).collect();
    let im: Vec<f64> = prods.iter().map(|z| z.im).collect();
    Ok(Complex64::new(pairwise_sum(&re), pairwise_sum(&im)) * f.grid().cell_volume())
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Holder-type certificate `|<f, g>| <= C ||f||_{F^s_{p,q}} ||g||_{F^{-s}_{p',q'}}`
/// over seeded pairs; the report's `ratio_max` is the measured `C`.
pub fn verify_duality(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    with_refinement(cfg, duality)
}

fn duality(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    let Setup { grid, va } = setup(cfg)?;
    let sp = &cfg.space;
    for &p in sp.p.iter().chain([&sp.q]) {
        open_unit_interval_exponent("duality exponent", p)?;
    }
    if sp.weights.is_some() {
        return Err(Error::ParameterWindow("duality does not take weights".into()));
    }
    let spec = sp.spec(&va);
    let p_dual: Vec<f64> = sp.p.iter().map(|&p| conjugate(p)).collect();
    let dual = SpaceSpec::f(-sp.s, &p_dual, conjugate(sp.q), &va);
    let b = bank(&grid, &va, cfg.bank)?;
    let fs = family(&grid, &va, &cfg.family)?;
    let gs = family_with_seed(&grid, &va, &cfg.family, cfg.family.seed.wrapping_add(PAIR_SEED_OFFSET))?;
    let recs = records(&fs, |m| {
        let g = &gs[m.id].f;
        let lhs = pairing(&m.f, g)?.norm();
        let rhs = tl_norm(&m.f, &spec, &b)?.value * tl_norm(g, &dual, &b)?.value;
        Ok((lhs, rhs))
    })?;
    let mut rep = report(Theorem::Duality.name(), StatisticKind::Bound, cfg, recs)?;
    let (_, k) = b
        .flat_zone_mode()
        .ok_or_else(|| Error::InvalidParameter("the bank has no flat zone on the lattice".into()))?;
    let e = GridFunction::exponential(grid.clone(), &k)?;
    let self_ratio = pairing(&e, &e)?.norm() / (tl_norm(&e, &spec, &b)?.value * tl_norm(&e, &dual, &b)?.value);
    rep.add_check("flat-zone self-pairing |ratio - 1|", (self_ratio - 1.0).abs(), cfg.thresholds.exactness_tol);
    Ok(vec![rep])
}

/// `max_x f*(x) / M f(x)` per member: `lhs` and `rhs` are the Peetre and
/// maximal values at the maximizing point.
pub fn verify_peetre(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    with_refinement(cfg, peetre)
}

fn peetre(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    let Setup { grid, va } = setup(cfg)?;
    let blocks = va.num_blocks();
    let r = cfg.peetre.r.clone().unwrap_or_else(|| vec![1.0; blocks]);
    let radii = match (&cfg.peetre.radii, &cfg.family.band) {
        (Some(radii), _) => radii.clone(),
        (None, BandSpec::Box { radii }) => radii.clone(),
        (None, BandSpec::Annulus { hi, .. }) => vec![*hi; blocks],
    };
    let members = family(&grid, &va, &cfg.family)?;
    let peak = |f: &GridFunction| -> Result<(f64, f64)> {
        let star = peetre_maximal(f, &va, &r, &radii)?;
        let max = maximal(f, &va, &r)?;
        let mut best = (0.0, 0.0, -1.0);
        for (a, b) in star.iter().zip(&max) {
            let ratio = if *b > 0.0 { a / b } else { 0.0 };
            if ratio > best.2 {
                best = (*a, *b, ratio);
            }
        }
        Ok((best.0, best.1))
    };
    let recs = records(&members, |m| peak(&m.f))?;
    let mut rep = report(Theorem::Peetre.name(), StatisticKind::Bound, cfg, recs)?;
    let one = GridFunction::constant(grid.clone(), Complex64::new(1.0, 0.0));
    let (a, b) = peak(&one)?;
    rep.add_check("constant |ratio - 1|", (a / b - 1.0).abs(), 0.0);
    Ok(vec![rep])
}

/// Triebel-Lizorkin norms from the configured bank against the comparison
/// bank.
pub fn verify_banks(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    with_refinement(cfg, banks)
}

fn banks(cfg: &LabConfig) -> Result<Vec<EquivalenceReport>> {
    let Setup { grid, va } = setup(cfg)?;
    let spec = cfg.space.spec(&va);
    let first = bank(&grid, &va, cfg.bank)?;
    let second = bank(&grid, &va, cfg.comparison_bank)?;
    let members = family(&grid, &va, &cfg.family)?;
    let recs = records(&members, |m| {
        Ok((tl_norm(&m.f, &spec, &first)?.value, tl_norm(&m.f, &spec, &second)?.value))
    })?;
    Ok(vec![report(Theorem::Banks.name(), StatisticKind::Interval, cfg, recs)?])
}
