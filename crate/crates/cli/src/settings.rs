//! Flat `key = value` settings merged from a config file and command-line
//! flags. Every value read by a subcommand is echoed in the output metadata
//! in the order it was read.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Keys written to output metadata that carry no input; skipped when a
/// metadata block is read back as a config file.
pub const INFO_KEYS: [&str; 3] = ["tool", "command", "generator"];

pub const ONE_KEYS: [&str; 3] = ["K", "J", "h"];
pub const TWO_KEYS: [&str; 12] =
    ["K111", "K112", "K122", "K222", "J11", "J12", "J22", "h1", "h2", "m1star", "m2star", "alpha"];

pub const KNOWN_KEYS: [&str; 38] = [
    "model",
    "K",
    "J",
    "h",
    "K111",
    "K112",
    "K122",
    "K222",
    "J11",
    "J12",
    "J22",
    "h1",
    "h2",
    "m1star",
    "m2star",
    "alpha",
    "fp-tol",
    "max-iter",
    "damping",
    "n-starts",
    "dedup-tol",
    "grid-resolution",
    "residual-tol",
    "tie-tol",
    "jump-threshold",
    "transition-tol",
    "max-cells",
    "alpha-steps",
    "vary",
    "from",
    "to",
    "steps",
    "x",
    "y",
    "target",
    "N",
    "N1",
    "N2",
];
pub const RUN_KEYS: [&str; 8] = ["sweeps", "burn-in", "seed", "thin", "out", "format", "threads", "jumps"];

fn is_known(key: &str) -> bool {
    KNOWN_KEYS.contains(&key) || RUN_KEYS.contains(&key)
}

pub fn parse_config(text: &str, origin: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("{origin}:{}: expected `key = value`", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if INFO_KEYS.contains(&key) {
            continue;
        }
        if !is_known(key) {
            return Err(CliError::Input(format!("{origin}:{}: unknown key `{key}`", lineno + 1)));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::Input(format!("{origin}:{}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    resolved: Vec<(String, String)>,
}

impl Settings {
    /// File values overlaid by flag values.
    pub fn merge(file: BTreeMap<String, String>, flags: Vec<(&'static str, Option<String>)>) -> Self {
        let mut values = file;
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Self { values, ..Self::default() }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Raw value, not echoed.
    pub fn raw(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    fn parse<T: FromStr>(&self, key: &str, raw: &str) -> Result<T, CliError> {
        raw.trim().parse().map_err(|_| CliError::Input(format!("invalid value `{raw}` for `{key}`")))
    }

    fn record(&mut self, key: &str, shown: String) {
        self.resolved.push((key.to_string(), shown));
    }

    pub fn opt<T: FromStr + Display>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            Some(raw) => {
                let v: T = self.parse(key, &raw)?;
                self.record(key, v.to_string());
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        match self.opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn require<T: FromStr + Display>(&mut self, key: &str) -> Result<T, CliError> {
        self.opt(key)?.ok_or_else(|| CliError::Input(format!("`{key}` is required")))
    }

    /// Fails when any of `keys` was supplied.
    pub fn reject(&self, keys: &[&str], why: &str) -> Result<(), CliError> {
        match keys.iter().find(|k| self.contains(k)) {
            Some(k) => Err(CliError::Input(format!("`{k}` {why}"))),
            None => Ok(()),
        }
    }

    /// Resolved values in reading order.
    pub fn resolved(&self) -> &[(String, String)] {
        &self.resolved
    }
}
