//! File output and the merged report tables.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anisolab::lab::EquivalenceReport;
use anyhow::{bail, Context, Result};

pub const SUMMARY_HEADER: &str =
    "theorem_id,kind,dims,samples,ratio_min,ratio_max,spread,drift_slope,max_discrepancy,refinement_delta,pass";
pub const PLOT_HEADER: &str = "theorem_id,member_id,base,log_t,log_ratio";

/// Writes `contents` to a temporary sibling and renames it into place, so a
/// failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("cannot write {}", path.display()))
}

/// File stem for a report id: `scaling[lambda=0.5]` -> `scaling_lambda=0.5`.
pub fn file_stem(id: &str) -> String {
    let mut s: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.=".contains(c) { c } else { '_' })
        .collect();
    while s.ends_with('_') {
        s.pop();
    }
    s
}

pub fn out_path(dir: &Path, stem: &str, ext: &str) -> PathBuf {
    dir.join(format!("{stem}.{ext}"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn summary_csv(reports: &[EquivalenceReport]) -> Result<String> {
    if reports.is_empty() {
        bail!("no reports to merge");
    }
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in reports {
        let dims: Vec<String> = r.dims.iter().map(|d| d.to_string()).collect();
        let kind = serde_json::to_value(r.kind)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.theorem_id,
            kind.as_str().unwrap_or_default(),
            dims.join("x"),
            r.samples,
            r.ratio_min,
            r.ratio_max,
            r.spread,
            opt(r.drift_slope),
            r.max_discrepancy,
            opt(r.refinement.as_ref().map(|x| x.delta)),
            r.pass
        )?;
    }
    Ok(out)
}

/// `ln t` against `ln ratio` for every member with a ratio.
pub fn plot_csv(reports: &[EquivalenceReport]) -> Result<String> {
    let mut out = String::from(PLOT_HEADER);
    out.push('\n');
    for r in reports {
        for rec in &r.records {
            if let Some(ratio) = rec.ratio {
                writeln!(out, "{},{},{},{},{}", r.theorem_id, rec.member, rec.base, rec.t.ln(), ratio.ln())?;
            }
        }
    }
    Ok(out)
}
