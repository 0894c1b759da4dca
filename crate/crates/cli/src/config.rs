//! `key = value` config files mirroring the command-line flags.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are flag names
//! without the leading dashes; `_` and `-` are interchangeable.

use std::collections::BTreeMap;
use std::str::FromStr;

pub const KEYS: &[&str] = &[
    "graph",
    "homogeneous",
    "marginals",
    "model",
    "resolution",
    "restarts",
    "damping",
    "tol",
    "max-iter",
    "seed",
    "match-tol",
    "out",
    "exact",
    "empirical",
    "all-bounds",
    "learn-iter",
    "step0",
    "schedule",
    "theta-resolution",
    "h-range",
    "j-range",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    /// Key to (line, raw value).
    entries: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError {
                line,
                message: format!("expected key = value, got `{trimmed}`"),
            })?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
            if entries.contains_key(&key) {
                return Err(ConfigError {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            entries.insert(key, (line, value.trim().to_string()));
        }
        Ok(Config { entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e| ConfigError {
                line: *line,
                message: format!("bad value for `{key}`: {e}"),
            }),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}
