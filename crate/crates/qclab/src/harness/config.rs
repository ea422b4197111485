//! Experiment configuration: sectioned key=value plain text.
//!
//! The on-disk format is INI-like and diff-friendly:
//!
//! ```text
//! # comment
//! [experiment]
//! kind = hartree_vlasov
//! label = hv-demo
//!
//! [physics]
//! hbar = 0.25
//! ```
//!
//! A config's identity is the SHA-256 digest of its canonical text (sections
//! and keys sorted, whitespace normalized, comments stripped), so the same
//! settings always hash identically no matter how the file was formatted.

use crate::error::{QcError, Result};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Parsed configuration: section -> key -> value, all strings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

impl Config {
    /// Parse config text. Unknown sections and keys are preserved verbatim;
    /// duplicate keys within a section are rejected.
    pub fn parse(text: &str) -> Result<Config> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        QcError::InvalidConfig(format!(
                            "line {}: unterminated section header {line:?}",
                            lineno + 1
                        ))
                    })?
                    .trim();
                if !valid_name(name) {
                    return Err(QcError::InvalidConfig(format!(
                        "line {}: invalid section name {name:?}",
                        lineno + 1
                    )));
                }
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                QcError::InvalidConfig(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !valid_name(key) {
                return Err(QcError::InvalidConfig(format!(
                    "line {}: invalid key {key:?}",
                    lineno + 1
                )));
            }
            let section = current.clone().ok_or_else(|| {
                QcError::InvalidConfig(format!(
                    "line {}: key {key:?} before any [section] header",
                    lineno + 1
                ))
            })?;
            let entry = sections.get_mut(&section).unwrap();
            if entry.insert(key.to_string(), value.to_string()).is_some() {
                return Err(QcError::InvalidConfig(format!(
                    "line {}: duplicate key {section}.{key}",
                    lineno + 1
                )));
            }
        }
        Ok(Config { sections })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    /// Canonical text: sections sorted, keys sorted, one `key = value` per
    /// line, one blank line between sections, no comments.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for (i, (section, keys)) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{section}]");
            for (k, v) in keys {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    /// Hex SHA-256 digest of the canonical text.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_text().as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }

    /// First 12 hex characters of the content hash, used in directory names.
    pub fn short_hash(&self) -> String {
        self.content_hash()[..12].to_string()
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        if !valid_name(section) || !valid_name(key) {
            return Err(QcError::InvalidConfig(format!(
                "invalid config address {section}.{key}"
            )));
        }
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|v| v.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key).ok_or_else(|| {
            QcError::InvalidConfig(format!("missing required config key {section}.{key}"))
        })
    }

    pub fn get_f64(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse::<f64>().map_err(|_| {
                QcError::InvalidConfig(format!("{section}.{key} = {v:?} is not a number"))
            }),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse::<usize>().map_err(|_| {
                QcError::InvalidConfig(format!("{section}.{key} = {v:?} is not a count"))
            }),
        }
    }

    pub fn get_u64(&self, section: &str, key: &str, default: u64) -> Result<u64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse::<u64>().map_err(|_| {
                QcError::InvalidConfig(format!("{section}.{key} = {v:?} is not an integer"))
            }),
        }
    }

    pub fn get_u32(&self, section: &str, key: &str, default: u32) -> Result<u32> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse::<u32>().map_err(|_| {
                QcError::InvalidConfig(format!("{section}.{key} = {v:?} is not an integer"))
            }),
        }
    }

    /// Comma-separated list of numbers (e.g. `hbar_list = 0.5, 0.25, 0.125`).
    pub fn get_f64_list(&self, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(section, key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|item| {
                    item.trim().parse::<f64>().map_err(|_| {
                        QcError::InvalidConfig(format!(
                            "{section}.{key} entry {item:?} is not a number"
                        ))
                    })
                })
                .collect(),
        }
    }

    /// The experiment kind (`[experiment] kind = ...`).
    pub fn kind(&self) -> Result<&str> {
        self.require("experiment", "kind")
    }

    /// The experiment label, falling back to the kind.
    pub fn label(&self) -> Result<String> {
        match self.get("experiment", "label") {
            Some(l) if valid_name(l) => Ok(l.to_string()),
            Some(l) => Err(QcError::InvalidConfig(format!(
                "experiment.label {l:?} must be alphanumeric with ._- only"
            ))),
            None => Ok(self.kind()?.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# a comment\n\
[experiment]\n\
kind = hartree_vlasov   # trailing comment\n\
label = hv-smoke\n\
\n\
[physics]\n\
hbar = 0.25\n\
hbar_list = 0.5, 0.25,0.125\n";

    #[test]
    fn parse_canonicalize_and_hash_round_trip() {
        let cfg = Config::parse(SAMPLE).unwrap();
        assert_eq!(cfg.kind().unwrap(), "hartree_vlasov");
        assert_eq!(cfg.label().unwrap(), "hv-smoke");
        assert_eq!(cfg.get_f64("physics", "hbar", 1.0).unwrap(), 0.25);
        assert_eq!(
            cfg.get_f64_list("physics", "hbar_list", &[]).unwrap(),
            vec![0.5, 0.25, 0.125]
        );
        // Canonical text is a fixed point of parse -> canonicalize.
        let canon = cfg.canonical_text();
        let reparsed = Config::parse(&canon).unwrap();
        assert_eq!(reparsed, cfg);
        assert_eq!(reparsed.canonical_text(), canon);
        assert_eq!(reparsed.content_hash(), cfg.content_hash());
        assert_eq!(cfg.short_hash().len(), 12);
    }

    #[test]
    fn formatting_noise_does_not_change_the_hash() {
        let a = Config::parse(SAMPLE).unwrap();
        let noisy = "\
[physics]\n\
hbar_list=0.5, 0.25,0.125\n\
hbar   =    0.25\n\
[experiment]\n\
label = hv-smoke\n\
kind=hartree_vlasov\n";
        let b = Config::parse(noisy).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        let mut c = b.clone();
        c.set("physics", "hbar", "0.5").unwrap();
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn malformed_configs_are_rejected() {
        assert!(Config::parse("key = 1\n").is_err()); // key before section
        assert!(Config::parse("[a\nk = 1\n").is_err()); // unterminated header
        assert!(Config::parse("[a]\nk  1\n").is_err()); // missing =
        assert!(Config::parse("[a]\nk = 1\nk = 2\n").is_err()); // duplicate
        let cfg = Config::parse("[a]\nk = x\n").unwrap();
        assert!(cfg.get_f64("a", "k", 0.0).is_err());
        assert!(cfg.require("a", "missing").is_err());
    }
}
