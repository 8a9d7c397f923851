//! Ratio statistics, verdicts and report serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Thresholds;
use crate::error::{Error, Result};
use crate::numeric::{exponent_serde, pairwise_sum, rel_diff};

/// Column order of [`EquivalenceReport::to_csv`].
pub const CSV_HEADER: &str = "member_id,t,lhs,rhs,ratio";

/// What the verdict of a report tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Two-sided equivalence: bounded spread, no drift, stable spread.
    Interval,
    /// Identity of two aggregations up to `exactness_tol`.
    Exactness,
    /// One-sided bound `lhs <= C rhs`: finite `C = ratio_max`, stable `C`.
    Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub member: usize,
    /// Base function the member was derived from.
    pub base: usize,
    pub t: f64,
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; `None` when both sides vanish.
    #[serde(with = "exponent_serde::option")]
    pub ratio: Option<f64>,
}

impl Record {
    pub fn new(member: usize, base: usize, t: f64, label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 && rhs == 0.0 {
            None
        } else if rhs == 0.0 {
            Some(f64::INFINITY)
        } else {
            Some(lhs / rhs)
        };
        Self {
            member,
            base,
            t,
            label: label.into(),
            lhs,
            rhs,
            ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub dims: Vec<usize>,
    #[serde(with = "exponent_serde")]
    pub coarse: f64,
    #[serde(with = "exponent_serde")]
    pub fine: f64,
    /// `|fine / coarse - 1|`.
    #[serde(with = "exponent_serde")]
    pub delta: f64,
}

/// Extra named condition folded into the verdict (`value <= bound`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "exponent_serde")]
    pub value: f64,
    #[serde(with = "exponent_serde")]
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub theorem_id: String,
    pub kind: StatisticKind,
    pub dims: Vec<usize>,
    pub thresholds: Thresholds,
    pub records: Vec<Record>,
    /// Members left out of the statistics (both sides zero).
    pub excluded: Vec<usize>,
    pub samples: usize,
    #[serde(with = "exponent_serde")]
    pub ratio_min: f64,
    #[serde(with = "exponent_serde")]
    pub ratio_max: f64,
    #[serde(with = "exponent_serde")]
    pub spread: f64,
    /// Within-base least-squares slope of `ln ratio` against `ln t`;
    /// `None` when no base function appears at two dilations.
    pub drift_slope: Option<f64>,
    /// Largest `|lhs - rhs| / max(|lhs|, |rhs|)`.
    pub max_discrepancy: f64,
    pub refinement: Option<Refinement>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Fixed-effects slope: `ln ratio` and `ln t` are centred per base function
/// so that differences between bases do not masquerade as drift.
fn drift_slope(records: &[&Record]) -> Option<f64> {
    let mut groups: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        let ratio = r.ratio.expect("filtered");
        groups.entry(r.base).or_default().push((r.t.ln(), ratio.ln()));
    }
    let mut xy = Vec::new();
    let mut xx = Vec::new();
    for pts in groups.values() {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        for &(x, y) in pts {
            xy.push((x - mx) * (y - my));
            xx.push((x - mx) * (x - mx));
        }
    }
    let den = pairwise_sum(&xx);
    if den <= 1e-300 {
        return None;
    }
    Some(pairwise_sum(&xy) / den)
}

/// Statistics and verdict over `records`. Needs at least
/// `thresholds.min_samples` records with a nonzero side.
pub fn equivalence_report(
    theorem_id: impl Into<String>,
    kind: StatisticKind,
    dims: &[usize],
    records: Vec<Record>,
    thresholds: Thresholds,
) -> Result<EquivalenceReport> {
    let used: Vec<&Record> = records.iter().filter(|r| r.ratio.is_some()).collect();
    if used.len() < thresholds.min_samples.max(1) {
        return Err(Error::TooFewSamples {
            got: used.len(),
            need: thresholds.min_samples.max(1),
        });
    }
    let excluded = records.iter().filter(|r| r.ratio.is_none()).map(|r| r.member).collect();
    let ratios: Vec<f64> = used.iter().map(|r| r.ratio.expect("filtered")).collect();
    let ratio_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio_max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = if ratio_min > 0.0 { ratio_max / ratio_min } else { f64::INFINITY };
    let drift = if ratios.iter().all(|r| r.is_finite() && *r > 0.0) {
        drift_slope(&used)
    } else {
        None
    };
    let max_discrepancy = used.iter().map(|r| rel_diff(r.lhs, r.rhs)).fold(0.0, f64::max);
    let mut report = EquivalenceReport {
        theorem_id: theorem_id.into(),
        kind,
        dims: dims.to_vec(),
        thresholds,
        samples: used.len(),
        records,
        excluded,
        ratio_min,
        ratio_max,
        spread,
        drift_slope: drift,
        max_discrepancy,
        refinement: None,
        checks: Vec::new(),
        pass: false,
    };
    report.pass = report.verdict();
    Ok(report)
}

impl EquivalenceReport {
    /// The quantity compared under refinement: the spread for interval
    /// reports, the constant `ratio_max` for bounds, the discrepancy for
    /// exactness reports.
    pub fn statistic(&self) -> f64 {
        match self.kind {
            StatisticKind::Interval => self.spread,
            StatisticKind::Bound => self.ratio_max,
            StatisticKind::Exactness => self.max_discrepancy,
        }
    }

    /// Records the same campaign on a refined grid.
    pub fn attach_refinement(&mut self, fine: &EquivalenceReport) {
        let (coarse, fine_stat) = (self.statistic(), fine.statistic());
        let delta = if coarse == fine_stat {
            0.0
        } else {
            (fine_stat / coarse - 1.0).abs()
        };
        self.refinement = Some(Refinement {
            dims: fine.dims.clone(),
            coarse,
            fine: fine_stat,
            delta,
        });
        self.pass = self.verdict();
    }

    pub fn add_check(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
        });
        self.pass = self.verdict();
    }

    fn verdict(&self) -> bool {
        let t = &self.thresholds;
        let core = match self.kind {
            StatisticKind::Interval => {
                self.spread <= t.spread_max && self.drift_slope.is_none_or(|d| d.abs() <= t.drift_max)
            }
            StatisticKind::Exactness => self.max_discrepancy <= t.exactness_tol,
            StatisticKind::Bound => self.ratio_max.is_finite(),
        };
        let refined = match (&self.refinement, self.kind) {
            (_, StatisticKind::Exactness) | (None, _) => true,
            (Some(r), _) => r.delta <= t.refinement_max,
        };
        core && refined && self.checks.iter().all(|c| c.pass)
    }

    /// Names of the conditions that failed, empty on a pass.
    pub fn failures(&self) -> Vec<String> {
        let t = &self.thresholds;
        let mut out = Vec::new();
        match self.kind {
            StatisticKind::Interval => {
                if !(self.spread <= t.spread_max) {
                    out.push(format!("spread {:.4} > {}", self.spread, t.spread_max));
                }
                if let Some(d) = self.drift_slope.filter(|d| !(d.abs() <= t.drift_max)) {
                    out.push(format!("|drift slope| {:.4} > {}", d.abs(), t.drift_max));
                }
            }
            StatisticKind::Exactness => {
                if !(self.max_discrepancy <= t.exactness_tol) {
                    out.push(format!("discrepancy {:.3e} > {:e}", self.max_discrepancy, t.exactness_tol));
                }
            }
            StatisticKind::Bound => {
                if !self.ratio_max.is_finite() {
                    out.push("unbounded ratio".into());
                }
            }
        }
        if let Some(r) = &self.refinement {
            if self.kind != StatisticKind::Exactness && !(r.delta <= t.refinement_max) {
                out.push(format!("refinement change {:.4} > {}", r.delta, t.refinement_max));
            }
        }
        for c in self.checks.iter().filter(|c| !c.pass) {
            out.push(format!("{} = {:.3e} > {:e}", c.name, c.value, c.bound));
        }
        out
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} [{}] n={} ratio [{:.6}, {:.6}] spread {:.4}",
            self.theorem_id,
            if self.pass { "PASS" } else { "FAIL" },
            self.samples,
            self.ratio_min,
            self.ratio_max,
            self.spread
        );
        if let Some(d) = self.drift_slope {
            let _ = write!(s, " drift {d:+.4}");
        }
        if self.kind == StatisticKind::Exactness {
            let _ = write!(s, " discrepancy {:.2e}", self.max_discrepancy);
        }
        if let Some(r) = &self.refinement {
            let _ = write!(s, " refine {:.4}", r.delta);
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per member in [`CSV_HEADER`] order; excluded members have an
    /// empty ratio.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let ratio = r.ratio.map(|v| format!("{v:e}")).unwrap_or_default();
            let _ = writeln!(out, "{},{:e},{:e},{:e},{}", r.member, r.t, r.lhs, r.rhs, ratio);
        }
        out
    }
}
