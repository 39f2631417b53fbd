//! Merging of command-line flags, config-file values and defaults into the
//! final run configuration. Flags win over the file, the file over defaults.

use std::path::PathBuf;

use ionchain::TrapConfig;

use crate::config_file::ConfigFile;
use crate::error::CliError;
use crate::{Format, IoArgs, TrapArgs};

pub struct ResolvedIo {
    pub output: Option<PathBuf>,
    pub format: Format,
}

pub fn load_config(io: &IoArgs) -> Result<ConfigFile, CliError> {
    match &io.config {
        Some(path) => ConfigFile::load(path),
        None => Ok(ConfigFile::empty()),
    }
}

pub fn resolve_io(io: &IoArgs, file: &ConfigFile) -> Result<ResolvedIo, CliError> {
    let output = io
        .output
        .clone()
        .or_else(|| file.raw("output").map(PathBuf::from));
    let format = match io.format {
        Some(f) => f,
        None => file.get::<Format>("format")?.unwrap_or(Format::Csv),
    };
    Ok(ResolvedIo { output, format })
}

/// File keys may also pin the subcommand; reject a mismatch instead of
/// silently running the wrong thing.
pub fn check_command(file: &ConfigFile, command: &str) -> Result<(), CliError> {
    if let Some(expected) = file.raw("command") {
        if expected != command {
            return Err(CliError::usage(format!(
                "config file is for `{expected}`, invoked as `{command}`"
            )));
        }
    }
    Ok(())
}

pub fn resolve_trap(trap: &TrapArgs, file: &ConfigFile) -> Result<TrapConfig, CliError> {
    let n_ions = trap
        .n_ions
        .or(file.get("n_ions")?)
        .ok_or_else(|| CliError::usage("missing ion count: pass --n or set n_ions"))?;
    let impurity_site = trap
        .impurity
        .or(file.get("impurity_site")?)
        .unwrap_or((n_ions + 1) / 2);
    let mass_ratio = trap.mass_ratio.or(file.get("mass_ratio")?).unwrap_or(1.0);
    let alpha = trap.alpha.or(file.get("alpha")?).unwrap_or(0.1);
    let dipole_beta = trap.beta.or(file.get("dipole_beta")?).unwrap_or(0.0);
    let ll_phonons = trap.ll_phonons.or(file.get("ll_phonons")?).unwrap_or(0);
    TrapConfig::new(n_ions, impurity_site, mass_ratio, alpha, dipole_beta, ll_phonons)
        .map_err(CliError::from)
}

/// Scan parameter accepted by grid commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanParam {
    MassRatio,
    Alpha,
    DipoleBeta,
}

impl ScanParam {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanParam::MassRatio => "mass_ratio",
            ScanParam::Alpha => "alpha",
            ScanParam::DipoleBeta => "dipole_beta",
        }
    }
}

impl std::str::FromStr for ScanParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mass_ratio" => Ok(ScanParam::MassRatio),
            "alpha" => Ok(ScanParam::Alpha),
            "dipole_beta" => Ok(ScanParam::DipoleBeta),
            other => Err(format!(
                "scan parameter must be mass_ratio, alpha or dipole_beta, got `{other}`"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scan {
    pub param: ScanParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Scan {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }

    pub fn apply(&self, base: &TrapConfig, value: f64) -> TrapConfig {
        let mut cfg = base.clone();
        match self.param {
            ScanParam::MassRatio => cfg.mass_ratio = value,
            ScanParam::Alpha => cfg.alpha = value,
            ScanParam::DipoleBeta => cfg.dipole_beta = value,
        }
        cfg
    }

    pub fn spec_string(&self) -> String {
        format!("{} {} {} {}", self.param.as_str(), self.min, self.max, self.count)
    }
}

pub fn resolve_scan(
    flag: &Option<Vec<String>>,
    file: &ConfigFile,
) -> Result<Option<Scan>, CliError> {
    let parts: Option<Vec<String>> = match flag {
        Some(values) => Some(values.clone()),
        None => file
            .raw("scan")
            .map(|raw| raw.split_whitespace().map(str::to_string).collect()),
    };
    let Some(parts) = parts else { return Ok(None) };
    if parts.len() != 4 {
        return Err(CliError::usage(format!(
            "scan needs PARAM MIN MAX COUNT, got {} values",
            parts.len()
        )));
    }
    let param: ScanParam = parts[0].parse().map_err(CliError::usage)?;
    let min: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::usage(format!("bad scan minimum `{}`", parts[1])))?;
    let max: f64 = parts[2]
        .parse()
        .map_err(|_| CliError::usage(format!("bad scan maximum `{}`", parts[2])))?;
    let count: usize = parts[3]
        .parse()
        .map_err(|_| CliError::usage(format!("bad scan count `{}`", parts[3])))?;
    if count == 0 {
        return Err(CliError::usage("scan count must be at least 1"));
    }
    if !(min <= max) {
        return Err(CliError::usage(format!("scan range [{min}, {max}] is empty")));
    }
    Ok(Some(Scan { param, min, max, count }))
}

/// Meta block shared by every command's JSON output.
pub fn base_meta(command: &str, trap: Option<&TrapConfig>) -> serde_json::Map<String, serde_json::Value> {
    let mut meta = serde_json::Map::new();
    meta.insert("command".into(), command.into());
    meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    if let Some(cfg) = trap {
        meta.insert("n_ions".into(), cfg.n_ions.into());
        meta.insert("impurity_site".into(), cfg.impurity_site.into());
        meta.insert("mass_ratio".into(), cfg.mass_ratio.into());
        meta.insert("alpha".into(), cfg.alpha.into());
        meta.insert("dipole_beta".into(), cfg.dipole_beta.into());
        meta.insert("ll_phonons".into(), cfg.ll_phonons.into());
    }
    meta
}
