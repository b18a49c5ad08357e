//! Line-oriented `key = value` configuration files. Unknown keys are
//! rejected with an error naming the key; command-line flags override the
//! file's values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

const KNOWN_KEYS: &[&str] = &[
    "scheme",
    "theta_deg",
    "phi_steps",
    "gates",
    "init",
    "eff_a",
    "eff_b",
    "eps_a",
    "eps_b",
    "rf_spread",
    "noise_sigma",
    "shots",
    "seed",
    "out",
    "out_dir",
    "dwell_time",
    "n_points",
    "t2",
    "offset_b",
    "offset_a",
    "quadrature_flip",
];

#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Failure(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<FileConfig, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "config line {}: expected `key = value`, found `{line}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("unknown config key: {key}")));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.values
            .get(key)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("config key {key}: bad number `{s}`")))
            })
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.values
            .get(key)
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("config key {key}: bad integer `{s}`")))
            })
            .transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.values
            .get(key)
            .map(|s| match s.as_str() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(CliError::Usage(format!(
                    "config key {key}: bad boolean `{other}`"
                ))),
            })
            .transpose()
    }
}
