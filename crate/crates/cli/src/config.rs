//! key=value config files and option resolution.
//!
//! A config file supplies defaults for a command's tuning knobs; flags given
//! on the command line always win. Lines are `key = value`, `#` starts a
//! comment, keys may be spelled with `-` or `_`. File paths never come from
//! config files; they are command-line only.

use crate::CliError;
use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug)]
pub struct Config {
    values: HashMap<String, String>,
    source: String,
}

impl Config {
    /// Load a config file, accepting only the given keys. `None` yields an
    /// empty config.
    pub fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Config { values: HashMap::new(), source: String::new() });
        };
        let source = path.display().to_string();
        let contents = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {source}: {e}")))?;
        let mut values = HashMap::new();
        for (idx, raw) in contents.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "{source}:{lineno}: expected key=value, got {line:?}"
                )));
            };
            let key = key.trim().replace('_', "-");
            let value = value.trim().to_owned();
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::usage(format!(
                    "{source}:{lineno}: unknown key {key:?} (expected one of: {})",
                    allowed.join(", ")
                )));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(CliError::usage(format!(
                    "{source}:{lineno}: duplicate key {key:?}"
                )));
            }
        }
        Ok(Config { values, source })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_parsed<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                CliError::usage(format!("config {}: key {key:?}: {e}", self.source))
            }),
        }
    }
}

/// Command line beats config beats default.
pub fn resolve<T>(cli: Option<T>, config: Option<T>, default: T) -> T {
    cli.or(config).unwrap_or(default)
}

/// As [`resolve`], for options without a default.
pub fn resolve_opt<T>(cli: Option<T>, config: Option<T>) -> Option<T> {
    cli.or(config)
}
