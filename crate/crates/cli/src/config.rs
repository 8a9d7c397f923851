//! Run configuration: the lab sections plus the CLI-only `output`, `norm`
//! and `rho` tables.

use std::path::{Path, PathBuf};

use anisolab::lab::{AnisotropyConfig, LabConfig};
use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: Option<crate::Format>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    #[default]
    F,
    B,
}

/// Function fed to `norm`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSource {
    /// `e^{i k . x}` for a lattice frequency `k`.
    Exponential { k: Vec<i64> },
    Constant { value: f64 },
    Zero,
    /// Member `index` of the configured family.
    Family { index: usize },
    /// Grid-function container written by `write_binary`.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    #[serde(default)]
    pub kind: NormKind,
    pub function: FunctionSource,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoConfig {
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
}

/// Parsed config file. The lab part stays a TOML table until a verb asks
/// for it, so `rho` only needs the anisotropy.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub output: OutputConfig,
    pub norm: Option<NormConfig>,
    pub rho: RhoConfig,
    lab: toml::Table,
    source: Option<PathBuf>,
}

fn take<T: for<'de> Deserialize<'de>>(table: &mut toml::Table, key: &str) -> Result<Option<T>> {
    match table.remove(key) {
        None => Ok(None),
        Some(v) => Ok(Some(v.try_into().with_context(|| format!("invalid [{key}] section"))?)),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lab: toml::Table = text.parse().context("config is not valid TOML")?;
        let mut cfg = RunConfig {
            output: take(&mut lab, "output")?.unwrap_or_default(),
            norm: take(&mut lab, "norm")?,
            rho: take(&mut lab, "rho")?.unwrap_or_default(),
            lab: toml::Table::new(),
            source: None,
        };
        cfg.lab = lab;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        cfg.source = Some(path.to_path_buf());
        Ok(cfg)
    }

    pub fn has_lab(&self) -> bool {
        !self.lab.is_empty()
    }

    fn origin(&self) -> String {
        self.source
            .as_ref()
            .map_or_else(|| "config".to_string(), |p| p.display().to_string())
    }

    /// Full lab configuration, checked field by field.
    pub fn lab(&self) -> Result<LabConfig> {
        let lab: LabConfig = toml::Value::Table(self.lab.clone())
            .try_into()
            .with_context(|| format!("invalid lab configuration in {}", self.origin()))?;
        lab.validate()?;
        Ok(lab)
    }

    pub fn anisotropy(&self) -> Result<AnisotropyConfig> {
        let Some(v) = self.lab.get("anisotropy") else {
            bail!("{}: missing [anisotropy] section", self.origin());
        };
        v.clone()
            .try_into()
            .with_context(|| format!("invalid [anisotropy] section in {}", self.origin()))
    }
}

/// `"64x128"` -> `[64, 128]`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let dims = s
        .split(['x', 'X'])
        .map(|d| d.trim().parse::<usize>().with_context(|| format!("bad grid size '{s}'")))
        .collect::<Result<Vec<_>>>()?;
    if dims.iter().any(|&d| d == 0) {
        bail!("grid sizes must be positive, got '{s}'");
    }
    Ok(dims)
}
