use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anisolab::lab::{presets, LabConfig, Theorem};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_anisolab"));
    c.env_remove("ANISOLAB_OUT").env_remove("ANISOLAB_THREADS");
    c
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().expect("binary runs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn norm_config(dir: &Path, function: &str) -> PathBuf {
    let lab = toml::to_string(&presets::preset(Theorem::Fubini)).unwrap();
    let path = dir.join("norm.toml");
    std::fs::write(&path, format!("{lab}\n[norm]\nkind = \"f\"\n[norm.function]\n{function}\n")).unwrap();
    path
}

fn norm_value(dir: &Path, function: &str) -> f64 {
    let cfg = norm_config(dir, function);
    let o = run(&["norm", "--config", cfg.to_str().unwrap()], dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    v["value"].as_f64().unwrap()
}

#[test]
fn verify_fubini_writes_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["verify", "fubini", "--grid", "32x32", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for stem in ["fubini_f=b", "fubini_script_f"] {
        let text = std::fs::read_to_string(out.join(format!("{stem}.json"))).unwrap();
        let r = anisolab::lab::EquivalenceReport::from_json(&text).unwrap();
        assert!(r.pass);
        assert_eq!(r.dims, vec![32, 32]);
    }
    let leftovers: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn verify_csv_format_and_failing_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = presets::preset(Theorem::Banks);
    cfg.refine = false;
    cfg.family.count = 20;
    cfg.thresholds.spread_max = 1.0;
    let path = dir.path().join("banks.toml");
    std::fs::write(&path, toml::to_string(&cfg).unwrap()).unwrap();
    let o = run(&["verify", "banks", "--config", "banks.toml", "--format", "csv", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("spread"));
    let csv = std::fs::read_to_string(dir.path().join("o/banks.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("member_id,t,lhs,rhs,ratio"));
    // 20 bases at two dilations, the zero member and the header.
    assert_eq!(csv.lines().count(), 42);
}

#[test]
fn malformed_config_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[grid]\ndims = [64]\nbogus = 1\n").unwrap();
    let o = run(&["verify", "fubini", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));

    std::fs::write(dir.path().join("nan.toml"), "[grid\n").unwrap();
    let o = run(&["verify", "fubini", "--config", "nan.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["verify", "fubini", "--config", "missing.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_overrides_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["verify", "fubini", "--grid", "32x0"][..],
        &["verify", "fubini", "--grid", "32x32x32"],
        &["verify", "fubini", "--threads", "0"],
    ] {
        let o = run(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn rho_example() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("rho.toml"),
        "[[anisotropy.blocks]]\ndiagonal = [1.0, 2.0]\n\n[rho]\npoints = [[1.0, 0.0], [0.0, 4.0]]\n",
    )
    .unwrap();
    let o = run(&["rho", "--config", "rho.toml", "--point=-2,0", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "x0,x1,rho,rho_block0\n1,0,1,1\n0,4,2,2\n-2,0,2,2\n");

    let o = run(&["rho", "--config", "rho.toml", "--point", "1,2,3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn norm_of_flat_zone_exponential_and_zero() {
    let dir = tempfile::tempdir().unwrap();
    // Fubini preset: s = 1, p = q = 3, periods 2pi and 2pi/32; rho(8, 0) = 8
    // sits in the flat zone of the third piece.
    let volume = (2.0 * std::f64::consts::PI).powi(2) / 32.0;
    let v = norm_value(dir.path(), "source = \"exponential\"\nk = [8, 0]");
    let expected = 8.0 * volume.powf(1.0 / 3.0);
    assert!((v / expected - 1.0).abs() < 1e-12, "{v} vs {expected}");

    let v = norm_value(dir.path(), "source = \"constant\"\nvalue = 3.0");
    let expected = 3.0 * volume.powf(1.0 / 3.0);
    assert!((v / expected - 1.0).abs() < 1e-12, "{v} vs {expected}");

    assert_eq!(norm_value(dir.path(), "source = \"zero\""), 0.0);
}

#[test]
fn norm_writes_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = norm_config(dir.path(), "source = \"family\"\nindex = 3");
    let o = run(&["norm", "--config", cfg.to_str().unwrap(), "--out", "o", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("o/norm.csv")).unwrap();
    assert!(csv.starts_with("kind,s,value,bank_id\nF,1,"));

    let cfg = norm_config(dir.path(), "source = \"family\"\nindex = 1000");
    let o = run(&["norm", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "report",
            data("interval.json").to_str().unwrap(),
            data("bound.json").to_str().unwrap(),
            "--out",
            "merged",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let expected = std::fs::read_to_string(data("expected_summary.csv")).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("merged/summary.csv")).unwrap();
    assert_eq!(summary, expected);
    assert_eq!(stdout(&o), expected);
    assert_eq!(summary.lines().count(), 3);
    let plot = std::fs::read_to_string(dir.path().join("merged/plot.csv")).unwrap();
    assert_eq!(plot, std::fs::read_to_string(data("expected_plot.csv")).unwrap());
}

#[test]
fn report_rejects_empty_and_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["report"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("junk.json"), "{\"theorem_id\": 3}").unwrap();
    let o = run(&["report", "junk.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("summary.csv").exists());
}

#[test]
fn unknown_theorem_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "pythagoras"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_configs_mirror_presets() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for t in Theorem::ALL {
        let text = std::fs::read_to_string(root.join(format!("{}.toml", t.name()))).unwrap();
        let cfg: LabConfig = toml::from_str(&text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(
            serde_json::to_value(&cfg).unwrap(),
            serde_json::to_value(presets::preset(t)).unwrap(),
            "{}",
            t.name()
        );
    }
}

#[test]
fn dump_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "scaling", "--dump-config", "--seed", "7"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let cfg: LabConfig = toml::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        serde_json::to_value(&cfg).unwrap(),
        serde_json::to_value(presets::preset_with_seed(Theorem::Scaling, 7)).unwrap()
    );
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    for (threads, out) in [("1", "one"), ("4", "four")] {
        let o = run(&["verify", "fubini", "--grid", "32x32", "--threads", threads, "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["fubini_f=b.json", "fubini_script_f.json"] {
        let a = std::fs::read(dir.path().join("one").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("four").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}
