//! Frozen metric values, one `key = value` per line.
//!
//! Keys are `<experiment>.<fingerprint>.<metric>`, where the fingerprint hashes
//! every result-relevant config value. A run whose configuration was never
//! frozen therefore finds no keys and reports a mismatch instead of comparing
//! against numbers from a different lattice.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Relative slack for `UpperBound` checks; only rounding-level drift is tolerated.
pub const UPPER_BOUND_SLACK: f64 = 1e-12;
/// Relative tolerance for `Match` checks.
pub const MATCH_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// The new value may not exceed the frozen one.
    UpperBound,
    /// The new value equals the frozen one within [`MATCH_TOLERANCE`].
    Match,
}

impl Check {
    pub fn holds(self, value: f64, frozen: f64) -> bool {
        match self {
            Check::UpperBound => value <= frozen + UPPER_BOUND_SLACK * frozen.abs(),
            Check::Match => value == frozen || (value - frozen).abs() <= MATCH_TOLERANCE * frozen.abs(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Baseline {
    pub entries: BTreeMap<String, f64>,
    /// `<experiment>.<fingerprint>` → readable config description.
    pub configs: BTreeMap<String, String>,
}

pub fn prefix(experiment: &str, fingerprint: &str) -> String {
    format!("{experiment}.{fingerprint}")
}

impl Baseline {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| err(path, e.to_string()))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut b = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((p, desc)) = comment.trim().split_once(": ") {
                    if p.contains('.') && !p.contains(' ') {
                        b.configs.insert(p.to_string(), desc.to_string());
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err(origin, format!("line {}: expected `key = value`", lineno + 1)))?;
            let value: f64 =
                v.trim().parse().map_err(|_| err(origin, format!("line {}: `{}` is not a number", lineno + 1, v.trim())))?;
            b.entries.insert(k.trim().to_string(), value);
        }
        Ok(b)
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# carlemanlab frozen metrics\n");
        for (p, desc) in &self.configs {
            out.push_str(&format!("# {p}: {desc}\n"));
        }
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v:e}\n"));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.render())?;
        Ok(())
    }

    /// Adds `values` under `prefix`; existing keys are only replaced with `force`.
    pub fn merge(&mut self, prefix: &str, description: &str, values: &[(String, f64)], force: bool) -> Result<()> {
        let clashes: Vec<String> =
            values.iter().map(|(m, _)| format!("{prefix}.{m}")).filter(|k| self.entries.contains_key(k)).collect();
        if !clashes.is_empty() && !force {
            return Err(CliError::BaselineExists { keys: clashes.join(", ") });
        }
        for (m, v) in values {
            self.entries.insert(format!("{prefix}.{m}"), *v);
        }
        self.configs.insert(prefix.to_string(), description.to_string());
        Ok(())
    }

    /// Frozen configurations of one experiment other than `prefix`, for mismatch messages.
    pub fn other_configs(&self, experiment: &str, prefix: &str) -> Vec<String> {
        let mut seen: Vec<String> = self
            .entries
            .keys()
            .filter_map(|k| {
                let mut parts = k.splitn(3, '.');
                let (e, f) = (parts.next()?, parts.next()?);
                (e == experiment).then(|| format!("{e}.{f}"))
            })
            .filter(|p| p != prefix)
            .collect();
        seen.dedup();
        seen.into_iter().map(|p| match self.configs.get(&p) {
            Some(desc) => format!("{p} ({desc})"),
            None => p,
        })
        .collect()
    }
}

fn err(path: &Path, message: String) -> CliError {
    CliError::Baseline { path: PathBuf::from(path), message }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_roundtrip() {
        let mut b = Baseline::default();
        let vals = vec![("c_emp.k2".to_string(), 0.1 + 0.2), ("tiny".to_string(), 3.0e-300)];
        b.merge("verify-weighted.abc", "n=48 steps=64", &vals, false).unwrap();
        let back = Baseline::parse(&b.render(), Path::new("x")).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.entries["verify-weighted.abc.c_emp.k2"], 0.1 + 0.2);
    }

    #[test]
    fn merge_refuses_overwrite_without_force() {
        let mut b = Baseline::default();
        let vals = vec![("m".to_string(), 1.0)];
        b.merge("e.f", "", &vals, false).unwrap();
        assert!(matches!(b.merge("e.f", "", &vals, false), Err(CliError::BaselineExists { .. })));
        b.merge("e.g", "", &vals, false).unwrap();
        b.merge("e.f", "", &[("m".to_string(), 2.0)], true).unwrap();
        assert_eq!(b.entries["e.f.m"], 2.0);
        assert_eq!(b.other_configs("e", "e.f"), vec!["e.g ()".to_string()]);
    }

    #[test]
    fn checks() {
        assert!(Check::UpperBound.holds(1.0, 1.0));
        assert!(Check::UpperBound.holds(0.5, 1.0));
        assert!(!Check::UpperBound.holds(1.0 + 1e-9, 1.0));
        assert!(Check::Match.holds(1.0 + 1e-12, 1.0));
        assert!(!Check::Match.holds(1.0 + 1e-9, 1.0));
        assert!(Check::Match.holds(0.0, 0.0));
    }

    #[test]
    fn malformed_lines_are_reported() {
        assert!(Baseline::parse("a = b\n", Path::new("x")).is_err());
        assert!(Baseline::parse("no equals\n", Path::new("x")).is_err());
    }
}
