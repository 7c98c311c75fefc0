//! `key=value` settings merged from a config file and command-line flags.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::str::FromStr;

use crate::CliError;

/// Every key accepted in a config file.
pub const KNOWN_KEYS: &[&str] = &[
    "algo",
    "baseline",
    "budget-mult",
    "dim",
    "evals",
    "fid",
    "g-start",
    "input",
    "instances",
    "jobs",
    "lambda-hyp",
    "n-boot",
    "n-training",
    "nhat-max",
    "no-surrogate",
    "out",
    "reps",
    "scaling-dim",
    "seed",
    "target",
    "active",
    "wallclock",
];

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    /// Values actually used, defaults included.
    effective: RefCell<BTreeMap<String, String>>,
}

impl Settings {
    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut s = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected key=value, got {line:?}",
                    n + 1
                )));
            };
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key {k:?}",
                    n + 1
                )));
            }
            s.values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.record(key, v);
        }
        v
    }

    pub fn require(&self, key: &str) -> Result<String, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Usage(format!("missing required key: {key}")))
    }

    pub fn or(&self, key: &str, default: &str) -> String {
        let v = self
            .values
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string());
        self.record(key, &v);
        v
    }

    pub fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T: ToString,
    {
        match self.get(key) {
            Some(v) => parse_value(key, &v),
            None => {
                self.record(key, &default.to_string());
                Ok(default)
            }
        }
    }

    fn record(&self, key: &str, value: &str) {
        self.effective
            .borrow_mut()
            .insert(key.to_string(), value.to_string());
    }

    /// Effective settings as `key=value` lines.
    pub fn echo(&self) -> String {
        self.effective
            .borrow()
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

pub fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value for {key}: {v:?}")))
}

/// Comma-separated list.
pub fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

/// Comma-separated items, each a number or an inclusive range `a..b`.
pub fn parse_ranges(key: &str, v: &str) -> Result<Vec<u64>, CliError> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (parse_value(key, a)?, parse_value(key, b)?);
                if a > b {
                    return Err(CliError::Usage(format!("empty range for {key}: {item}")));
                }
                out.extend(a..=b);
            }
            None => out.push(parse_value(key, item)?),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_and_overrides() {
        let mut s = Settings::parse("# c\nalgo = ipop-saacm\n\nfid=1,2\n").unwrap();
        s.set("fid", "3");
        assert_eq!(s.get("algo").as_deref(), Some("ipop-saacm"));
        assert_eq!(s.get("fid").as_deref(), Some("3"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(matches!(
            Settings::parse("bogus=1"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(Settings::parse("algo"), Err(CliError::Usage(_))));
    }

    #[test]
    fn missing_key_is_named() {
        let s = Settings::default();
        match s.require("algo") {
            Err(CliError::Usage(m)) => assert!(m.contains("algo")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_ranges("i", "1..3,7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_ranges("i", "3..1").is_err());
        assert!(parse_ranges("i", "x").is_err());
    }

    #[test]
    fn echo_lists_defaults() {
        let s = Settings::parse("seed=4").unwrap();
        assert_eq!(s.parsed("seed", 1u64).unwrap(), 4);
        assert_eq!(s.parsed("n-boot", 100usize).unwrap(), 100);
        assert_eq!(s.echo(), "n-boot=100\nseed=4\n");
    }
}
