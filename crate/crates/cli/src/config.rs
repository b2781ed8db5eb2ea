//! Flat `key = value` config files and the typed resolver over them.
//!
//! One key per line, `#` starts a comment line, values are bare tokens.
//! Every experiment pulls its keys through a `Resolver`, which records the
//! canonical echo of each resolved value for the metadata sidecar and
//! rejects keys nothing consumed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::output::fmt_float;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io { path: String, msg: String },
    Parse { line: usize, col: usize, msg: String },
    Duplicate { key: String, line: usize },
    Unknown { key: String, line: usize },
    Missing { key: String },
    Value { key: String, msg: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, msg } => write!(f, "{path}: {msg}"),
            ConfigError::Parse { line, col, msg } => {
                write!(f, "line {line}, column {col}: {msg}")
            }
            ConfigError::Duplicate { key, line } => {
                write!(f, "duplicate key `{key}` (line {line})")
            }
            ConfigError::Unknown { key, line } => {
                if *line == 0 {
                    write!(f, "unknown key `{key}` (--set)")
                } else {
                    write!(f, "unknown key `{key}` (line {line})")
                }
            }
            ConfigError::Missing { key } => write!(f, "missing key `{key}`"),
            ConfigError::Value { key, msg } => write!(f, "key `{key}`: {msg}"),
        }
    }
}

/// Parsed config: key -> (raw value, source line; 0 means a --set override).
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

pub(crate) fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((lhs, rhs)) = trimmed.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    col: raw_line.len() + 1,
                    msg: "expected `key = value`".into(),
                });
            };
            let key = lhs.trim();
            if !valid_key(key) {
                return Err(ConfigError::Parse {
                    line,
                    col: raw_line.find('=').unwrap_or(0) + 1,
                    msg: format!("bad key `{key}`: use lowercase letters, digits, `_`"),
                });
            }
            let value = rhs.trim();
            if value.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    col: raw_line.len() + 1,
                    msg: format!("key `{key}` has no value"),
                });
            }
            if entries.insert(key.to_string(), (value.to_string(), line)).is_some() {
                return Err(ConfigError::Duplicate { key: key.into(), line });
            }
        }
        Ok(Self { entries })
    }

    /// Apply one `--set key=value` override; overrides replace file values.
    pub fn apply_set(&mut self, spec: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = spec.split_once('=') else {
            return Err(ConfigError::Parse {
                line: 0,
                col: 1,
                msg: format!("--set `{spec}`: expected key=value"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !valid_key(key) {
            return Err(ConfigError::Parse {
                line: 0,
                col: 1,
                msg: format!("--set: bad key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line: 0,
                col: 1,
                msg: format!("--set: key `{key}` has no value"),
            });
        }
        self.entries.insert(key.into(), (value.into(), 0));
        Ok(())
    }

    /// Inject a computed value (sweep axes); bypasses key syntax checks.
    pub fn insert_value(&mut self, key: &str, value: String) {
        self.entries.insert(key.into(), (value, 0));
    }

    pub fn get(&self, key: &str) -> Option<&(String, usize)> {
        self.entries.get(key)
    }
}

/// Typed key consumption with canonical echoes; `finish` enforces the
/// schema-version pin, the experiment tag, and rejects leftover keys.
pub struct Resolver<'a> {
    raw: &'a RawConfig,
    used: BTreeSet<String>,
    echo: BTreeMap<String, String>,
}

fn bad(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.into(), msg: msg.into() }
}

impl<'a> Resolver<'a> {
    pub fn new(raw: &'a RawConfig) -> Self {
        Self { raw, used: BTreeSet::new(), echo: BTreeMap::new() }
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.used.insert(key.to_string());
        self.raw.get(key).map(|(v, _)| v.as_str())
    }

    pub fn require_f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        match self.take(key) {
            None => Err(ConfigError::Missing { key: key.into() }),
            Some(v) => self.parse_f64(key, v),
        }
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            None => {
                self.echo.insert(key.into(), fmt_float(default));
                Ok(default)
            }
            Some(v) => self.parse_f64(key, v),
        }
    }

    fn parse_f64(&mut self, key: &str, v: &str) -> Result<f64, ConfigError> {
        let x: f64 = v
            .parse()
            .map_err(|_| bad(key, format!("`{v}` is not a number")))?;
        if !x.is_finite() {
            return Err(bad(key, "must be finite"));
        }
        self.echo.insert(key.into(), fmt_float(x));
        Ok(x)
    }

    pub fn require_usize(&mut self, key: &str) -> Result<usize, ConfigError> {
        match self.take(key) {
            None => Err(ConfigError::Missing { key: key.into() }),
            Some(v) => self.parse_usize(key, v),
        }
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            None => {
                self.echo.insert(key.into(), default.to_string());
                Ok(default)
            }
            Some(v) => self.parse_usize(key, v),
        }
    }

    fn parse_usize(&mut self, key: &str, v: &str) -> Result<usize, ConfigError> {
        let x: usize = v
            .parse()
            .map_err(|_| bad(key, format!("`{v}` is not a nonnegative integer")))?;
        self.echo.insert(key.into(), x.to_string());
        Ok(x)
    }

    pub fn u64_or(&mut self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.take(key) {
            None => {
                self.echo.insert(key.into(), default.to_string());
                Ok(default)
            }
            Some(v) => {
                let x: u64 = v
                    .parse()
                    .map_err(|_| bad(key, format!("`{v}` is not a nonnegative integer")))?;
                self.echo.insert(key.into(), x.to_string());
                Ok(x)
            }
        }
    }

    pub fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        let x = match self.take(key) {
            None => default,
            Some("true") | Some("1") => true,
            Some("false") | Some("0") => false,
            Some(v) => return Err(bad(key, format!("`{v}` is not a boolean (true/false)"))),
        };
        self.echo.insert(key.into(), x.to_string());
        Ok(x)
    }

    pub fn str_or(&mut self, key: &str, default: &str) -> String {
        let v = self.take(key).unwrap_or(default).to_string();
        self.echo.insert(key.into(), v.clone());
        v
    }

    pub fn require_choice(
        &mut self,
        key: &str,
        choices: &[&str],
    ) -> Result<String, ConfigError> {
        match self.take(key) {
            None => Err(ConfigError::Missing { key: key.into() }),
            Some(v) => self.parse_choice(key, v, choices),
        }
    }

    pub fn choice_or(
        &mut self,
        key: &str,
        choices: &[&str],
        default: &str,
    ) -> Result<String, ConfigError> {
        match self.take(key) {
            None => {
                self.echo.insert(key.into(), default.into());
                Ok(default.into())
            }
            Some(v) => self.parse_choice(key, v, choices),
        }
    }

    fn parse_choice(
        &mut self,
        key: &str,
        v: &str,
        choices: &[&str],
    ) -> Result<String, ConfigError> {
        if !choices.contains(&v) {
            return Err(bad(key, format!("`{v}` is not one of {}", choices.join(", "))));
        }
        self.echo.insert(key.into(), v.into());
        Ok(v.into())
    }

    /// Comma-separated subset of `allowed`, preserving the given order.
    pub fn list_or(
        &mut self,
        key: &str,
        allowed: &[&str],
        default: &[&str],
    ) -> Result<Vec<String>, ConfigError> {
        let items: Vec<String> = match self.take(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some(v) => v.split(',').map(|s| s.trim().to_string()).collect(),
        };
        if items.is_empty() {
            return Err(bad(key, "list is empty"));
        }
        for item in &items {
            if !allowed.contains(&item.as_str()) {
                return Err(bad(
                    key,
                    format!("`{item}` is not one of {}", allowed.join(", ")),
                ));
            }
        }
        self.echo.insert(key.into(), items.join(","));
        Ok(items)
    }

    /// Range-check an already-resolved value.
    pub fn check(&self, cond: bool, key: &str, msg: &str) -> Result<(), ConfigError> {
        if cond {
            Ok(())
        } else {
            Err(bad(key, msg))
        }
    }

    /// Enforce `schema_version = 1` and the experiment tag, reject unknown
    /// keys, and hand back the canonical echo.
    pub fn finish(
        mut self,
        experiment: &str,
    ) -> Result<BTreeMap<String, String>, ConfigError> {
        let version = self.usize_or("schema_version", 1)?;
        self.check(version == 1, "schema_version", "this tool understands version 1")?;
        if let Some(tag) = self.take("experiment") {
            if tag != experiment {
                return Err(bad(
                    "experiment",
                    format!("config says `{tag}` but `{experiment}` was requested"),
                ));
            }
        }
        self.echo.insert("experiment".into(), experiment.into());
        for (key, (_, line)) in &self.raw.entries {
            if !self.used.contains(key) {
                return Err(ConfigError::Unknown { key: key.clone(), line: *line });
            }
        }
        Ok(self.echo)
    }
}
