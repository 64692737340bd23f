//! Analysis settings and the line-oriented config file format.
//!
//! ```text
//! # comment
//! annotations = ThreadSafe
//! allowlist_types += com.example.SafeBox
//! lock_types += MyLock
//! rules = P1,P3
//! format = json
//! ```
//!
//! `key = a,b` replaces the current list, `key += a,b` appends to it.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config key `{key}` on line {line}")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value `{value}` for `{key}`: {message}")]
    InvalidValue { key: String, value: String, message: String },
}

fn invalid(key: &str, value: &str, message: &str) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_string(), value: value.to_string(), message: message.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    P1,
    P2,
    P3,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::P1, Rule::P2, Rule::P3];

    pub fn id(self) -> &'static str {
        match self {
            Rule::P1 => "P1",
            Rule::P2 => "P2",
            Rule::P3 => "P3",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::P1 => "no-escaping",
            Rule::P2 => "safe-publication",
            Rule::P3 => "correct-synchronization",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P1" => Ok(Rule::P1),
            "P2" => Ok(Rule::P2),
            "P3" => Ok(Rule::P3),
            _ => Err(format!("unknown rule `{s}` (expected P1, P2 or P3)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Sarif,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            "sarif" => Ok(OutputFormat::Sarif),
            _ => Err(format!("unknown format `{s}` (expected text, json or sarif)")),
        }
    }
}

/// Types whose instances are considered thread-safe; fields of these types
/// need no synchronization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadSafeTypeAllowlist {
    pub qualified_prefixes: Vec<String>,
    pub exact_types: Vec<String>,
}

impl Default for ThreadSafeTypeAllowlist {
    fn default() -> Self {
        ThreadSafeTypeAllowlist { qualified_prefixes: vec!["java.util.concurrent.".to_string()], exact_types: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub annotation_names: Vec<String>,
    pub allowlist: ThreadSafeTypeAllowlist,
    pub lock_types: Vec<String>,
    pub lock_methods: Vec<String>,
    pub unlock_methods: Vec<String>,
    pub mutator_methods: Vec<String>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            annotation_names: strings(&["ThreadSafe"]),
            allowlist: ThreadSafeTypeAllowlist::default(),
            lock_types: strings(&["Lock", "ReentrantLock"]),
            lock_methods: strings(&["lock", "lockInterruptibly", "tryLock"]),
            unlock_methods: strings(&["unlock"]),
            mutator_methods: strings(&["add", "put", "remove", "set", "clear", "offer", "poll"]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub analysis: AnalysisConfig,
    pub rules: Vec<Rule>,
    pub format: OutputFormat,
}

impl Default for Config {
    fn default() -> Self {
        Config { analysis: AnalysisConfig::default(), rules: Rule::ALL.to_vec(), format: OutputFormat::Text }
    }
}

/// Checks that a list entry is a nonempty name without whitespace.
pub fn normalize_entry(key: &str, value: &str) -> Result<String, ConfigError> {
    let v = value.trim();
    if v.is_empty() {
        return Err(invalid(key, value, "empty entry"));
    }
    if v.chars().any(char::is_whitespace) {
        return Err(invalid(key, value, "entries must not contain whitespace"));
    }
    Ok(v.to_string())
}

impl Config {
    /// Applies a config file on top of `self`.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, append, value) = if let Some((k, v)) = line.split_once("+=") {
                (k.trim(), true, v)
            } else if let Some((k, v)) = line.split_once('=') {
                (k.trim(), false, v)
            } else {
                return Err(ConfigError::Syntax { line: line_no, message: format!("expected `key = value`, found `{line}`") });
            };
            let values: Vec<&str> = value.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
            self.set(key, append, &values, line_no)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, append: bool, values: &[&str], line: usize) -> Result<(), ConfigError> {
        let a = &mut self.analysis;
        let list = match key {
            "annotations" => &mut a.annotation_names,
            "allowlist_prefixes" => &mut a.allowlist.qualified_prefixes,
            "allowlist_types" => &mut a.allowlist.exact_types,
            "lock_types" => &mut a.lock_types,
            "lock_methods" => &mut a.lock_methods,
            "unlock_methods" => &mut a.unlock_methods,
            "mutator_methods" => &mut a.mutator_methods,
            "rules" => {
                let parsed = values
                    .iter()
                    .map(|v| v.parse::<Rule>().map_err(|m| invalid(key, v, &m)))
                    .collect::<Result<Vec<_>, _>>()?;
                if append {
                    self.rules.extend(parsed);
                } else {
                    self.rules = parsed;
                }
                self.rules.sort();
                self.rules.dedup();
                if self.rules.is_empty() {
                    return Err(invalid(key, &values.join(","), "at least one rule is required"));
                }
                return Ok(());
            }
            "format" => {
                if append || values.len() != 1 {
                    return Err(invalid(key, &values.join(","), "exactly one format is required"));
                }
                self.format = values[0].parse().map_err(|m: String| invalid(key, values[0], &m))?;
                return Ok(());
            }
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        };
        let parsed = values.iter().map(|v| normalize_entry(key, v)).collect::<Result<Vec<_>, _>>()?;
        if !append {
            list.clear();
        }
        for v in parsed {
            if !list.contains(&v) {
                list.push(v);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = Config::default();
        assert_eq!(c.analysis.annotation_names, vec!["ThreadSafe"]);
        assert_eq!(c.analysis.allowlist.qualified_prefixes, vec!["java.util.concurrent."]);
        assert_eq!(c.rules, Rule::ALL.to_vec());
        assert_eq!(c.format, OutputFormat::Text);
    }

    #[test]
    fn replace_and_append() {
        let mut c = Config::default();
        c.apply_file("# test\nlock_types += MyLock\nrules = p3, P1\nformat = json\nmutator_methods = push\n").unwrap();
        assert_eq!(c.analysis.lock_types, vec!["Lock", "ReentrantLock", "MyLock"]);
        assert_eq!(c.rules, vec![Rule::P1, Rule::P3]);
        assert_eq!(c.format, OutputFormat::Json);
        assert_eq!(c.analysis.mutator_methods, vec!["push"]);
    }

    #[test]
    fn rejects_malformed_lines() {
        let mut c = Config::default();
        assert!(matches!(c.apply_file("lock_types MyLock"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(c.apply_file("\ncolour = red"), Err(ConfigError::UnknownKey { line: 2, .. })));
        assert!(c.apply_file("rules = P4").is_err());
        assert!(c.apply_file("rules =").is_err());
        assert!(c.apply_file("format = xml").is_err());
        assert!(c.apply_file("format = json, text").is_err());
    }
}
