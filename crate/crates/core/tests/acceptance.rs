//! Acceptance run: one line per criterion, `PASS`/`FAIL`, with timings.
//! Tolerances and runtime budgets are pinned here. Runs without the libtest
//! harness so the lines always reach stdout.

use std::time::{Duration, Instant};

use anisolab::anisotropy::{Anisotropy, DecomposedAnisotropy};
use anisolab::filterbank::FilterBank;
use anisolab::grid::TorusGrid;
use anisolab::lab::{presets, run, EquivalenceReport, LabConfig, Theorem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HOMOGENEITY_CLOSED_FORM_TOL: f64 = 1e-8;
const HOMOGENEITY_ROOT_FINDING_TOL: f64 = 1e-5;
const PARTITION_TOL: f64 = 1e-14;
const EXACTNESS_TOL: f64 = 1e-10;
const REFINEMENT_MAX: f64 = 0.15;
const DRIFT_MAX: f64 = 0.05;
const ROUND_TRIP_TOL: f64 = 1e-12;
const SELF_PAIRING_TOL: f64 = 1e-10;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

impl Outcome {
    fn line(&self) -> String {
        let ok = self.pass && self.elapsed <= self.budget;
        format!(
            "criterion {:>2} {:<22} {}  {} [{:.2}s / {}s]",
            self.id,
            self.name,
            if ok { "PASS" } else { "FAIL" },
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }

    fn ok(&self) -> bool {
        self.pass && self.elapsed <= self.budget
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

/// Coarse run (timed) and refined run (untimed), with the refinement
/// statistic attached to each coarse report.
fn campaign(theorem: Theorem, cfg: &LabConfig, refine: bool) -> (Vec<EquivalenceReport>, Duration) {
    let mut coarse_cfg = cfg.clone();
    coarse_cfg.refine = false;
    let start = Instant::now();
    let mut coarse = run(theorem, &coarse_cfg).expect("campaign runs");
    let elapsed = start.elapsed();
    if refine {
        let fine = run(theorem, &coarse_cfg.refined()).expect("refined campaign runs");
        for (c, f) in coarse.iter_mut().zip(&fine) {
            c.attach_refinement(f);
        }
    }
    for r in &coarse {
        println!("    {}", r.summary());
    }
    (coarse, elapsed)
}

fn refinement(r: &EquivalenceReport) -> f64 {
    r.refinement.as_ref().map_or(f64::INFINITY, |x| x.delta)
}

fn drift(r: &EquivalenceReport) -> f64 {
    r.drift_slope.map_or(f64::INFINITY, f64::abs)
}

fn check(r: &EquivalenceReport, name: &str) -> f64 {
    r.checks
        .iter()
        .find(|c| c.name.starts_with(name))
        .map_or(f64::INFINITY, |c| c.value)
}

fn homogeneity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases = [
        (Anisotropy::diagonal(&[1.0, 1.5, 2.0]).unwrap(), HOMOGENEITY_CLOSED_FORM_TOL),
        (Anisotropy::from_rows(&[vec![2.0, 0.5], vec![0.5, 4.0]]).unwrap(), HOMOGENEITY_ROOT_FINDING_TOL),
        (Anisotropy::from_rows(&[vec![1.0, -1.0], vec![1.0, 1.0]]).unwrap(), HOMOGENEITY_ROOT_FINDING_TOL),
    ];
    let mut worst = [0.0f64; 3];
    let mut pass = true;
    for (c, (a, tol)) in cases.iter().enumerate() {
        for _ in 0..1000 {
            let x: Vec<f64> = (0..a.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let rho = a.quasi_norm(&x).unwrap();
            for t in [0.25, 0.5, 2.0, 4.0] {
                let err = (a.quasi_norm(&a.dilate(t, &x).unwrap()).unwrap() / (t * rho) - 1.0).abs();
                worst[c] = worst[c].max(err);
            }
        }
        pass &= worst[c] <= *tol;
    }
    Outcome {
        id: 1,
        name: "homogeneity",
        pass,
        detail: format!(
            "max rel err diagonal {:.1e}, symmetric {:.1e}, rotation {:.1e}",
            worst[0], worst[1], worst[2]
        ),
        elapsed: start.elapsed(),
        budget: secs(1),
    }
}

fn partition_of_unity() -> Outcome {
    let start = Instant::now();
    let grid = TorusGrid::new(&[128, 128], &[2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI / 32.0]).unwrap();
    let va = DecomposedAnisotropy::diagonal_blocks(&[vec![1.0], vec![2.0]]).unwrap();
    let bank = FilterBank::build(&grid, &va, 1.0, 2.0).unwrap();
    let limit = bank.coverage_radius();
    let mut worst = 0.0f64;
    let mut covered = 0usize;
    for (i, &r) in bank.rho().iter().enumerate() {
        if r <= limit {
            covered += 1;
            let sum: f64 = bank.multipliers().iter().map(|m| m[i]).sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    Outcome {
        id: 2,
        name: "partition of unity",
        pass: worst <= PARTITION_TOL,
        detail: format!("max |sum - 1| = {worst:.1e} over {covered} covered modes"),
        elapsed: start.elapsed(),
        budget: secs(1),
    }
}

fn fubini() -> Outcome {
    let (reps, elapsed) = campaign(Theorem::Fubini, &presets::preset(Theorem::Fubini), false);
    let worst = reps.iter().map(|r| r.max_discrepancy).fold(0.0, f64::max);
    Outcome {
        id: 3,
        name: "fubini exactness",
        pass: reps.len() == 2 && worst <= EXACTNESS_TOL && reps.iter().all(|r| r.samples >= 100),
        detail: format!("max rel discrepancy {worst:.1e} over {} reports", reps.len()),
        elapsed,
        budget: secs(10),
    }
}

fn banks() -> Outcome {
    let (reps, elapsed) = campaign(Theorem::Banks, &presets::preset(Theorem::Banks), true);
    let r = &reps[0];
    Outcome {
        id: 4,
        name: "bank independence",
        pass: r.samples >= 100 && r.spread <= 4.0 && refinement(r) <= REFINEMENT_MAX,
        detail: format!("spread {:.4}, refinement {:.4}", r.spread, refinement(r)),
        elapsed,
        budget: secs(60),
    }
}

fn scaling() -> Outcome {
    let (reps, elapsed) = campaign(Theorem::Scaling, &presets::preset(Theorem::Scaling), false);
    let pass = reps.len() == 2 && reps.iter().all(|r| r.spread <= 2.0 && drift(r) <= DRIFT_MAX);
    let detail = reps
        .iter()
        .map(|r| format!("{}: spread {:.4} drift {:+.4}", r.theorem_id, r.spread, r.drift_slope.unwrap_or(f64::NAN)))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        id: 5,
        name: "scaling",
        pass,
        detail,
        elapsed,
        budget: secs(30),
    }
}

fn lifting() -> Outcome {
    let (reps, elapsed) = campaign(Theorem::Lifting, &presets::preset(Theorem::Lifting), true);
    let trip = reps.iter().map(|r| check(r, "round trip")).fold(0.0, f64::max);
    let pass = reps.len() == 2
        && trip <= ROUND_TRIP_TOL
        && reps.iter().all(|r| r.spread <= 4.0 && refinement(r) <= REFINEMENT_MAX);
    let detail = reps
        .iter()
        .map(|r| format!("{}: spread {:.4} refine {:.4}", r.theorem_id, r.spread, refinement(r)))
        .chain([format!("round trip {trip:.1e}")])
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        id: 6,
        name: "lifting",
        pass,
        detail,
        elapsed,
        budget: secs(30),
    }
}

fn difference() -> Outcome {
    let (reps, elapsed) = campaign(Theorem::Difference, &presets::preset(Theorem::Difference), true);
    let r = &reps[0];
    Outcome {
        id: 7,
        name: "difference norm",
        pass: r.spread <= 8.0 && drift(r) <= DRIFT_MAX && refinement(r) <= REFINEMENT_MAX,
        detail: format!(
            "spread {:.4}, drift {:+.4}, refinement {:.4}",
            r.spread,
            r.drift_slope.unwrap_or(f64::NAN),
            refinement(r)
        ),
        elapsed,
        budget: secs(120),
    }
}

fn intersection() -> Outcome {
    let (reps, elapsed) = campaign(Theorem::Intersection, &presets::preset(Theorem::Intersection), true);
    let r = &reps[0];
    let exchange = check(r, "order exchange");
    Outcome {
        id: 8,
        name: "intersection",
        pass: r.spread <= 8.0 && drift(r) <= DRIFT_MAX && refinement(r) <= REFINEMENT_MAX && exchange <= EXACTNESS_TOL,
        detail: format!(
            "spread {:.4}, drift {:+.4}, refinement {:.4}, exchange {:.1e}",
            r.spread,
            r.drift_slope.unwrap_or(f64::NAN),
            refinement(r),
            exchange
        ),
        elapsed,
        budget: secs(120),
    }
}

fn duality() -> Outcome {
    let (reps, elapsed) = campaign(Theorem::Duality, &presets::preset(Theorem::Duality), true);
    let r = &reps[0];
    let selfp = check(r, "flat-zone self-pairing");
    Outcome {
        id: 9,
        name: "duality certificate",
        pass: r.samples >= 200 && refinement(r) <= REFINEMENT_MAX && selfp <= SELF_PAIRING_TOL,
        detail: format!("C = {:.4}, refinement {:.4}, |self - 1| = {selfp:.1e}", r.ratio_max, refinement(r)),
        elapsed,
        budget: secs(60),
    }
}

fn peetre() -> Outcome {
    let (reps, elapsed) = campaign(Theorem::Peetre, &presets::preset(Theorem::Peetre), true);
    let r = &reps[0];
    let constant = check(r, "constant");
    Outcome {
        id: 10,
        name: "peetre",
        pass: r.ratio_max.is_finite() && refinement(r) <= REFINEMENT_MAX && constant == 0.0,
        detail: format!(
            "max ratio {:.4}, refinement {:.4}, constant |ratio - 1| = {constant:.1e}",
            r.ratio_max,
            refinement(r)
        ),
        elapsed,
        budget: secs(30),
    }
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let mut identical = true;
    for t in [Theorem::Fubini, Theorem::Peetre, Theorem::Banks] {
        let mut cfg = presets::preset(t);
        cfg.refine = false;
        let a = run(t, &cfg).unwrap();
        let b = run(t, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            identical &= x.to_json().unwrap() == y.to_json().unwrap() && x.to_csv() == y.to_csv();
        }
    }
    Outcome {
        id: 11,
        name: "determinism",
        pass: identical,
        detail: "fubini, peetre, banks reports byte-identical on re-run".into(),
        elapsed: start.elapsed(),
        budget: secs(120),
    }
}

fn main() {
    let steps: [fn() -> Outcome; 11] = [
        homogeneity,
        partition_of_unity,
        fubini,
        banks,
        scaling,
        lifting,
        difference,
        intersection,
        duality,
        peetre,
        determinism,
    ];
    let mut failed = Vec::new();
    for step in steps {
        let o = step();
        println!("{}", o.line());
        if !o.ok() {
            failed.push(o.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
