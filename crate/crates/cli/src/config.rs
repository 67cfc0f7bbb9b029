//! Option resolution: command-line flag, then config file, then default.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use pac_core::model::parse_key_values;

/// Keys accepted in a config file. Each matches the long flag of the same name.
const KNOWN_KEYS: &[&str] = &[
    "seed",
    "workers",
    "snr-start",
    "snr-stop",
    "snr-step",
    "min-errors",
    "max-frames",
    "frames",
    "delta",
    "max-steps",
    "no-shortcuts",
    "list-size",
    "method",
    "systematic",
    "simplified",
    "conv-forward",
    "conv-feedback",
    "design-snr",
    "beta",
    "population",
    "iters",
    "crossovers",
    "mutation-swaps",
    "spectrum-list",
];

pub const SEED_ENV: &str = "PAC_SEED";

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (k, v) in parse_key_values(text)? {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                bail!("unknown config key \"{k}\"");
            }
            values.insert(k, v);
        }
        Ok(Self { values })
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow::anyhow!("config key {key}: {e}")))
            .transpose()
    }

    /// Flag value if given, else config value, else `default`.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// Flag value if given, else config value, if any.
    pub fn resolve_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    /// Boolean switch: set by the flag, or by `key=1` / `key=true` in the file.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.values.get(key).map(String::as_str) {
            None | Some("0") | Some("false") => Ok(false),
            Some("1") | Some("true") => Ok(true),
            Some(v) => bail!("config key {key}: expected 0/1 or true/false, got \"{v}\""),
        }
    }

    /// Seed: flag, config, `PAC_SEED`, then 0.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag {
            return Ok(s);
        }
        if let Some(s) = self.get("seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().with_context(|| format!("{SEED_ENV}=\"{v}\" is not an unsigned integer")),
            Err(_) => Ok(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let cfg = ConfigFile::parse("# comment\ndelta = 1\nmin-errors=50\n").unwrap();
        assert_eq!(cfg.resolve(Some(3.0), "delta", 2.0).unwrap(), 3.0);
        assert_eq!(cfg.resolve(None, "delta", 2.0).unwrap(), 1.0);
        assert_eq!(cfg.resolve::<u64>(None, "max-frames", 7).unwrap(), 7);
        assert_eq!(cfg.resolve::<u64>(None, "min-errors", 200).unwrap(), 50);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ConfigFile::parse("speed=3").is_err());
        assert!(ConfigFile::parse("delta").is_err());
        let cfg = ConfigFile::parse("delta=abc").unwrap();
        assert!(cfg.resolve::<f64>(None, "delta", 2.0).is_err());
    }

    #[test]
    fn switches() {
        let cfg = ConfigFile::parse("systematic=1\nsimplified=false").unwrap();
        assert!(cfg.switch(false, "systematic").unwrap());
        assert!(!cfg.switch(false, "simplified").unwrap());
        assert!(cfg.switch(true, "simplified").unwrap());
    }
}
