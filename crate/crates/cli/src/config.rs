//! `key = value` config files.
//!
//! Keys are flag names without the leading dashes; `-` and `_` are
//! interchangeable. Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const KEYS: &[&str] = &[
    "rho",
    "na",
    "nb",
    "power_dbm",
    "delta_alpha",
    "sigma_m2_db",
    "sigma_e2_db",
    "noise_m_dbm",
    "noise_e_dbm",
    "trials",
    "seed",
    "workers",
    "methods",
    "out",
];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("config line {}: expected 'key = value', got '{}'", i + 1, raw.trim());
            };
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                bail!("config line {}: unknown key '{}'", i + 1, k.trim());
            }
            let value = v.trim();
            if value.is_empty() {
                bail!("config line {}: '{key}' has no value", i + 1);
            }
            entries.insert(key, value.to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parses `key`, naming it in the error.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| anyhow::anyhow!("config key '{key}': invalid value '{v}': {e}"))
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_dashes() {
        let c = Config::parse("# table 2\nrho = 0.5\npower-dbm=20 # dBm\n\nmethods = closed_form,monte_carlo\n").unwrap();
        assert_eq!(c.get::<f64>("rho").unwrap(), Some(0.5));
        assert_eq!(c.get::<f64>("power_dbm").unwrap(), Some(20.0));
        assert_eq!(c.raw("methods"), Some("closed_form,monte_carlo"));
        assert_eq!(c.get::<f64>("nb").unwrap(), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(Config::parse("rho 0.5").is_err());
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("rho =").is_err());
        let c = Config::parse("trials = many").unwrap();
        let e = c.get::<u64>("trials").unwrap_err().to_string();
        assert!(e.contains("trials"), "{e}");
    }
}
