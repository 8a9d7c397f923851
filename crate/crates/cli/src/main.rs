//! `anisolab`: quasi-norms, Littlewood-Paley norms and verification
//! campaigns from a TOML config.

mod config;
mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anisolab::filterbank::FilterBank;
use anisolab::grid::{io::read_binary, GridFunction};
use anisolab::lab::{self, presets, EquivalenceReport, LabConfig, Theorem};
use anisolab::spaces::{norm, SpaceKind, SpaceSpec};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use config::{parse_dims, FunctionSource, NormKind, RunConfig};
use output::{out_path, write_atomic};

const ENV_OUT: &str = "ANISOLAB_OUT";
const ENV_THREADS: &str = "ANISOLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "anisolab", version, about = "Anisotropic mixed-norm function-space numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (also ANISOLAB_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the family seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (also ANISOLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the grid size, e.g. 64x64.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quasi-norms of points under the configured anisotropy.
    Rho {
        /// Comma-separated coordinates; repeatable.
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Littlewood-Paley norm of the function in the [norm] section.
    Norm,
    /// Runs a verification campaign; exit status 1 when it fails.
    Verify {
        #[arg(value_parser = parse_theorem)]
        theorem: Theorem,
        /// Print the effective config as TOML and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Merges report JSON files into summary.csv and plot.csv.
    Report { files: Vec<PathBuf> },
}

fn parse_theorem(s: &str) -> std::result::Result<Theorem, String> {
    s.parse().map_err(|e: anisolab::error::Error| e.to_string())
}

struct Settings {
    out: Option<PathBuf>,
    format: Format,
}

fn settings(cli: &Cli, cfg: &RunConfig) -> Settings {
    let out = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(ENV_OUT).map(PathBuf::from))
        .or_else(|| cfg.output.dir.clone());
    Settings {
        out,
        format: cli.format.or(cfg.output.format).unwrap_or(Format::Json),
    }
}

fn init_threads(cli: &Cli) -> Result<()> {
    let n = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var(ENV_THREADS) {
            Ok(v) => Some(v.parse().with_context(|| format!("{ENV_THREADS} must be a count, got '{v}'"))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            bail!("thread count must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    Ok(())
}

fn apply_overrides(cli: &Cli, lab: &mut LabConfig) -> Result<()> {
    if let Some(seed) = cli.seed {
        lab.family.seed = seed;
    }
    if let Some(g) = &cli.grid {
        let dims = parse_dims(g)?;
        if dims.len() != lab.grid.dims.len() {
            bail!("--grid gives {} sizes, the config grid has {}", dims.len(), lab.grid.dims.len());
        }
        lab.grid.dims = dims;
    }
    lab.validate()?;
    Ok(())
}

/// Writes to `<out>/<name>` when an output directory is set, else prints.
fn emit(settings: &Settings, name: &str, text: &str) -> Result<()> {
    match &settings.out {
        Some(dir) => {
            let path = dir.join(name);
            write_atomic(&path, text.as_bytes())?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_rho(cli: &Cli, cfg: &RunConfig, args: &[String]) -> Result<()> {
    let va = cfg.anisotropy()?.build()?;
    let mut points = cfg.rho.points.clone();
    for a in args {
        points.push(
            a.split(',')
                .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad coordinate in '{a}'")))
                .collect::<Result<_>>()?,
        );
    }
    if points.is_empty() {
        bail!("no points: pass --point or set rho.points");
    }
    let settings = settings(cli, cfg);
    let mut rows = Vec::new();
    for x in &points {
        if x.len() != va.dim() {
            bail!("point {x:?} has {} coordinates, the anisotropy has dimension {}", x.len(), va.dim());
        }
        rows.push((x.clone(), va.vector_quasi_norm(x)?, va.block_quasi_norms(x)?));
    }
    let text = match settings.format {
        Format::Csv => {
            let mut s = String::new();
            let xs: Vec<String> = (0..va.dim()).map(|i| format!("x{i}")).collect();
            let bs: Vec<String> = (0..va.num_blocks()).map(|j| format!("rho_block{j}")).collect();
            writeln!(s, "{},rho,{}", xs.join(","), bs.join(","))?;
            for (x, r, b) in &rows {
                let xs: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                let bs: Vec<String> = b.iter().map(|v| v.to_string()).collect();
                writeln!(s, "{},{r},{}", xs.join(","), bs.join(","))?;
            }
            s
        }
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(x, r, b)| serde_json::json!({ "point": x, "rho": r, "blocks": b }))
                .collect();
            serde_json::to_string_pretty(&v)? + "\n"
        }
    };
    emit(&settings, &format!("rho.{}", settings.format.ext()), &text)
}

fn norm_function(lab: &LabConfig, source: &FunctionSource) -> Result<GridFunction> {
    let grid = lab.grid.build()?;
    Ok(match source {
        FunctionSource::Exponential { k } => GridFunction::exponential(grid, k)?,
        FunctionSource::Constant { value } => GridFunction::constant(grid, Complex64::new(*value, 0.0)),
        FunctionSource::Zero => GridFunction::zeros(grid, 1),
        FunctionSource::Family { index } => {
            if *index >= lab.family.count {
                bail!("norm.function.index {index} is outside the family (count {})", lab.family.count);
            }
            let va = lab.anisotropy.build()?;
            lab::base_function(&grid, &va, &lab.family, lab.family.seed, *index)?
        }
        FunctionSource::File { path } => {
            let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            let f = read_binary(std::io::BufReader::new(file))?;
            if f.grid() != &grid {
                bail!("{} lives on a different grid than the config", path.display());
            }
            f
        }
    })
}

fn cmd_norm(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let mut lab = cfg.lab()?;
    apply_overrides(cli, &mut lab)?;
    let Some(nc) = &cfg.norm else {
        bail!("missing [norm] section");
    };
    let f = norm_function(&lab, &nc.function)?;
    let va = lab.anisotropy.build()?;
    let mut spec: SpaceSpec = lab.space.spec(&va);
    if nc.kind == NormKind::B {
        spec.kind = SpaceKind::B;
    }
    let bank = FilterBank::build(f.grid(), &va, lab.bank.gamma, lab.bank.delta)?;
    let value = norm(&f, &spec, &bank)?;
    let settings = settings(cli, cfg);
    let text = match settings.format {
        Format::Json => value.to_json()? + "\n",
        Format::Csv => format!("kind,s,value,bank_id\n{:?},{},{},{}\n", spec.kind, spec.s, value.value, value.bank_id),
    };
    emit(&settings, &format!("norm.{}", settings.format.ext()), &text)
}

fn cmd_verify(cli: &Cli, cfg: &RunConfig, theorem: Theorem, dump: bool) -> Result<bool> {
    let mut lab = if cfg.has_lab() {
        cfg.lab()?
    } else {
        presets::preset(theorem)
    };
    apply_overrides(cli, &mut lab)?;
    if dump {
        print!("{}", toml::to_string(&lab)?);
        return Ok(true);
    }
    let reports = lab::run(theorem, &lab)?;
    let settings = settings(cli, cfg);
    let dir = settings.out.clone().unwrap_or_else(|| PathBuf::from("."));
    for r in &reports {
        let text = match settings.format {
            Format::Json => r.to_json()? + "\n",
            Format::Csv => r.to_csv(),
        };
        let path = out_path(&dir, &output::file_stem(&r.theorem_id), settings.format.ext());
        write_atomic(&path, text.as_bytes())?;
        println!("{}", r.summary());
        for f in r.failures() {
            println!("  {f}");
        }
        println!("  wrote {}", path.display());
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn load_report(path: &Path) -> Result<EquivalenceReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    EquivalenceReport::from_json(&text).with_context(|| format!("{} is not a report JSON file", path.display()))
}

fn cmd_report(cli: &Cli, cfg: &RunConfig, files: &[PathBuf]) -> Result<()> {
    if files.is_empty() {
        bail!("report needs at least one report file");
    }
    let reports = files.iter().map(|p| load_report(p)).collect::<Result<Vec<_>>>()?;
    let summary = output::summary_csv(&reports)?;
    let plot = output::plot_csv(&reports)?;
    let dir = settings(cli, cfg).out.unwrap_or_else(|| PathBuf::from("."));
    write_atomic(&dir.join("summary.csv"), summary.as_bytes())?;
    write_atomic(&dir.join("plot.csv"), plot.as_bytes())?;
    print!("{summary}");
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    init_threads(cli)?;
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::Rho { points } => cmd_rho(cli, &cfg, points).map(|_| true),
        Command::Norm => cmd_norm(cli, &cfg).map(|_| true),
        Command::Verify { theorem, dump_config } => cmd_verify(cli, &cfg, *theorem, *dump_config),
        Command::Report { files } => cmd_report(cli, &cfg, files).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
