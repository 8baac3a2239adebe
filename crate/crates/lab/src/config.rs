//! Flat `key = value` experiment files.
//!
//! ```text
//! # comments start with '#'
//! preset = theorem-c
//! samples = 200
//! checkpoints = 1000, 10000, 100000
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use blaschke_core::targets::RealSequence;
use blaschke_core::{Blaschke, DiskMap};

use crate::presets::Preset;

/// Keys every preset accepts.
pub const COMMON_KEYS: &[(&str, &str)] = &[
    ("preset", "preset name"),
    ("seed", "Monte Carlo seed"),
    ("output_dir", "directory for reports"),
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}: key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

fn err(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        key: key.map(str::to_owned),
        message: message.into(),
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// A validated configuration: every key is known to the preset, defaults filled in.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub preset: Preset,
    entries: BTreeMap<String, Entry>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(None, None, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(Some(n), None, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(err(Some(n), None, "empty key"));
            }
            if value.is_empty() {
                return Err(err(Some(n), Some(key), "empty value"));
            }
            if raw.contains_key(key) {
                return Err(err(Some(n), Some(key), "duplicate key"));
            }
            raw.insert(
                key.to_owned(),
                Entry {
                    value: value.to_owned(),
                    line: Some(n),
                },
            );
        }
        let preset_entry = raw
            .get("preset")
            .ok_or_else(|| err(None, Some("preset"), "missing; run `list-presets` for the options"))?;
        let preset = Preset::from_name(&preset_entry.value).ok_or_else(|| {
            err(
                preset_entry.line,
                Some("preset"),
                format!("unknown preset `{}`", preset_entry.value),
            )
        })?;
        for (key, entry) in &raw {
            let known = COMMON_KEYS.iter().any(|(k, _)| k == key) || preset.parameters().iter().any(|p| p.key == key);
            if !known {
                return Err(err(
                    entry.line,
                    Some(key),
                    format!("unknown key for preset {}", preset.name()),
                ));
            }
        }
        let mut entries = raw;
        for p in preset.parameters() {
            entries.entry(p.key.to_owned()).or_insert(Entry {
                value: p.default.to_owned(),
                line: None,
            });
        }
        entries.entry("seed".into()).or_insert(Entry {
            value: "1".into(),
            line: None,
        });
        let config = ExperimentConfig { preset, entries };
        config.validate()?;
        Ok(config)
    }

    /// A preset with all defaults.
    pub fn defaults(preset: Preset) -> Self {
        Self::parse(&format!("preset = {}\n", preset.name())).expect("defaults are valid")
    }

    // every default and supplied value must parse with its declared kind
    fn validate(&self) -> Result<(), ConfigError> {
        for p in self.preset.parameters() {
            match p.kind {
                Kind::Count => self.count(p.key).map(drop)?,
                Kind::Real => self.real(p.key).map(drop)?,
                Kind::Counts => self.counts(p.key).map(drop)?,
                Kind::Reals => self.reals(p.key).map(drop)?,
                Kind::Sequence => self.sequence(p.key).map(drop)?,
                Kind::Map => self.map_spec(p.key).map(drop)?,
            }
        }
        self.seed().map(drop)
    }

    /// Overrides a value, as if it had been written in the file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        if !self.entries.contains_key(key) && !COMMON_KEYS.iter().any(|(k, _)| *k == key) {
            return Err(err(
                None,
                Some(key),
                format!("unknown key for preset {}", self.preset.name()),
            ));
        }
        self.entries.insert(
            key.to_owned(),
            Entry {
                value: value.into(),
                line: None,
            },
        );
        self.validate()
    }

    /// Effective `key = value` pairs, sorted by key.
    pub fn resolved(&self) -> Vec<(String, String)> {
        self.entries.iter().map(|(k, e)| (k.clone(), e.value.clone())).collect()
    }

    pub fn output_dir(&self) -> Option<&str> {
        self.entries.get("output_dir").map(|e| e.value.as_str())
    }

    fn entry(&self, key: &str) -> Result<&Entry, ConfigError> {
        self.entries.get(key).ok_or_else(|| err(None, Some(key), "not set"))
    }

    fn bad(&self, key: &str, what: &str) -> ConfigError {
        let e = self.entries.get(key);
        err(
            e.and_then(|e| e.line),
            Some(key),
            format!("expected {what}, found `{}`", e.map_or("", |e| e.value.as_str())),
        )
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        self.entry("seed")?
            .value
            .parse()
            .map_err(|_| self.bad("seed", "an unsigned integer"))
    }

    pub fn count(&self, key: &str) -> Result<usize, ConfigError> {
        parse_count(&self.entry(key)?.value).ok_or_else(|| self.bad(key, "a non-negative integer"))
    }

    pub fn real(&self, key: &str) -> Result<f64, ConfigError> {
        parse_real(&self.entry(key)?.value).ok_or_else(|| self.bad(key, "a finite real number"))
    }

    pub fn counts(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        self.entry(key)?
            .value
            .split(',')
            .map(|s| parse_count(s.trim()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.bad(key, "a comma-separated list of integers"))
    }

    pub fn reals(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.entry(key)?
            .value
            .split(',')
            .map(|s| parse_real(s.trim()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.bad(key, "a comma-separated list of reals"))
    }

    pub fn sequence(&self, key: &str) -> Result<RealSequence, ConfigError> {
        parse_sequence(&self.entry(key)?.value).ok_or_else(|| self.bad(key, SEQUENCE_FORMS))
    }

    pub fn map_spec(&self, key: &str) -> Result<MapSpec, ConfigError> {
        parse_map(&self.entry(key)?.value).ok_or_else(|| self.bad(key, MAP_FORMS))
    }

    /// A config error pointing at `key`, for checks that need several values.
    pub fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        err(self.entries.get(key).and_then(|e| e.line), Some(key), message)
    }
}

/// The type of a preset parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Count,
    Real,
    Counts,
    Reals,
    Sequence,
    Map,
}

pub const SEQUENCE_FORMS: &str =
    "one of default, constant(x), power(scale, exponent), capped-log-root(cap), inverse-log(shift)";
pub const MAP_FORMS: &str = "one of nested(lambda), parabolic, rotation(angle), nested-sequence";

/// A map family selected in a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    /// `z (z + λ)/(1 + λ z)` at every step.
    Nested(f64),
    Parabolic,
    Rotation(f64),
    /// `b_n` with `λ_n = 1 - μ_n` taken from the `mu` key.
    NestedSequence,
}

impl MapSpec {
    /// The autonomous map, if this spec names one.
    pub fn autonomous(&self) -> Option<DiskMap> {
        match self {
            MapSpec::Nested(l) => Some(Blaschke::nested(*l).expect("validated").into()),
            MapSpec::Parabolic => Some(Blaschke::parabolic().into()),
            MapSpec::Rotation(phi) => Some(DiskMap::rotation(*phi)),
            MapSpec::NestedSequence => None,
        }
    }
}

fn parse_count(s: &str) -> Option<usize> {
    let cleaned: String = s.chars().filter(|c| *c != '_').collect();
    if let Ok(v) = cleaned.parse::<usize>() {
        return Some(v);
    }
    // allow 1e5 style
    let x: f64 = cleaned.parse().ok()?;
    (x >= 0.0 && x.fract() == 0.0 && x < 1e18).then_some(x as usize)
}

fn parse_real(s: &str) -> Option<f64> {
    let x: f64 = s.parse().ok()?;
    x.is_finite().then_some(x)
}

// `name(a, b)` or `name`
fn call(s: &str) -> Option<(&str, Vec<f64>)> {
    let s = s.trim();
    match s.split_once('(') {
        None => Some((s, Vec::new())),
        Some((name, rest)) => {
            let inner = rest.strip_suffix(')')?;
            let args = inner
                .split(',')
                .map(|a| parse_real(a.trim()))
                .collect::<Option<Vec<_>>>()?;
            Some((name.trim(), args))
        }
    }
}

pub fn parse_sequence(s: &str) -> Option<RealSequence> {
    let (name, args) = call(s)?;
    let seq = match (name, args.as_slice()) {
        ("default", []) => RealSequence::default_family(),
        ("constant", [x]) => RealSequence::Constant(*x),
        ("power", [scale, exponent]) => RealSequence::PowerLaw {
            scale: *scale,
            exponent: *exponent,
        },
        ("capped-log-root", [cap]) => RealSequence::CappedLogRoot { cap: *cap },
        ("inverse-log", [shift]) if *shift > 1.0 => RealSequence::InverseLog { shift: *shift },
        _ => return None,
    };
    Some(seq)
}

pub fn parse_map(s: &str) -> Option<MapSpec> {
    let (name, args) = call(s)?;
    Some(match (name, args.as_slice()) {
        ("nested", [l]) if (0.0..1.0).contains(l) => MapSpec::Nested(*l),
        ("parabolic", []) => MapSpec::Parabolic,
        ("rotation", [phi]) => MapSpec::Rotation(*phi),
        ("nested-sequence", []) => MapSpec::NestedSequence,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::parse("preset = theorem-c\nsamples = 7 # few\n").unwrap();
        assert_eq!(c.count("samples").unwrap(), 7);
        assert_eq!(c.count("horizon").unwrap(), 100_000);
        assert_eq!(c.seed().unwrap(), 1);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let e = ExperimentConfig::parse("# x\npreset = theorem-c\nsampels = 5\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("sampels"));
        assert_eq!(e.line, Some(3));
        assert!(e.to_string().contains("sampels"));
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(ExperimentConfig::parse("preset theorem-c\n").is_err());
        assert!(ExperimentConfig::parse("preset = nope\n").is_err());
        assert!(ExperimentConfig::parse("samples = 3\n").is_err());
        assert!(ExperimentConfig::parse("preset = theorem-c\nsamples = 3\nsamples = 4\n").is_err());
        let e = ExperimentConfig::parse("preset = theorem-c\nsamples = many\n").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn value_forms() {
        assert_eq!(parse_count("1e5"), Some(100_000));
        assert_eq!(parse_count("1_000"), Some(1000));
        assert_eq!(parse_count("1.5"), None);
        assert_eq!(
            parse_sequence("power(0.5, 1.5)"),
            Some(RealSequence::PowerLaw {
                scale: 0.5,
                exponent: 1.5
            })
        );
        assert_eq!(parse_sequence("default"), Some(RealSequence::default_family()));
        assert_eq!(parse_sequence("power(1)"), None);
        assert_eq!(parse_map("nested(0.5)"), Some(MapSpec::Nested(0.5)));
        assert_eq!(parse_map("nested(1.5)"), None);
        assert_eq!(parse_map("parabolic"), Some(MapSpec::Parabolic));
    }
}
