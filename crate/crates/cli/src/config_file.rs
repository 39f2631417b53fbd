//! Plain `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, keys mirror the resolved
//! run-configuration field names (`n_ions`, `impurity_site`, `mass_ratio`,
//! `alpha`, `dipole_beta`, `ll_phonons`, `scan`, `output`, `format`,
//! `omega_s_max`, `duration`, `steps`, `law`, `threshold`, `strict`,
//! `cutoff`, `command`). Command-line flags override file values.

use std::collections::HashMap;
use std::path::Path;

use crate::error::CliError;

const KNOWN_KEYS: &[&str] = &[
    "command",
    "n_ions",
    "impurity_site",
    "mass_ratio",
    "alpha",
    "dipole_beta",
    "ll_phonons",
    "scan",
    "output",
    "format",
    "omega_s_max",
    "duration",
    "steps",
    "law",
    "threshold",
    "strict",
    "cutoff",
];

pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn empty() -> Self {
        ConfigFile { values: HashMap::new() }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!("{origin}:{}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::usage(format!(
                    "{origin}:{}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// File value parsed as `T`, when present.
    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::usage(format!("config key `{key}`: bad value `{raw}`"))),
        }
    }
}
