//! Run configuration shared by the pipeline and the command line.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::GenerationConfig;
use crate::placeholder::{SkeletonLimits, DEFAULT_MAX_PLACEHOLDERS, DEFAULT_MIN_PLACEHOLDER_LEN, DEFAULT_SKELETON_CAP};
use crate::row_match::{DEFAULT_N0, DEFAULT_N_MAX};
use crate::transform::{UnitKind, UnitKinds};

/// Text normalization applied at ingestion, before any other stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    None,
    /// Per-character lowercase mapping; characters whose lowercase form is
    /// not a single character are kept unchanged.
    Lowercase,
}

impl Normalization {
    pub fn apply(self, text: &str) -> String {
        match self {
            Normalization::None => text.to_string(),
            Normalization::Lowercase => text
                .chars()
                .map(|c| {
                    let mut lower = c.to_lowercase();
                    match (lower.next(), lower.next()) {
                        (Some(l), None) => l,
                        _ => c,
                    }
                })
                .collect(),
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Normalization::None),
            "lowercase" => Ok(Normalization::Lowercase),
            other => Err(format!("unknown normalization '{other}' (expected none or lowercase)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n0: usize,
    pub n_max: usize,
    pub max_placeholders: usize,
    pub skeleton_cap: usize,
    pub min_placeholder_len: usize,
    pub units: Vec<UnitKind>,
    pub min_support: f64,
    pub top_k: usize,
    /// Number of candidate pairs to sample before generation; `None` uses all.
    pub sample: Option<usize>,
    pub seed: u64,
    pub normalize: Normalization,
    /// Worker threads; 0 lets the runtime choose.
    pub workers: usize,
    /// Include per-stage timings in reports. Timings differ between runs,
    /// so reports are only byte-identical with this off.
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n0: DEFAULT_N0,
            n_max: DEFAULT_N_MAX,
            max_placeholders: DEFAULT_MAX_PLACEHOLDERS,
            skeleton_cap: DEFAULT_SKELETON_CAP,
            min_placeholder_len: DEFAULT_MIN_PLACEHOLDER_LEN,
            units: UnitKinds::default_set().iter().collect(),
            min_support: 0.0,
            top_k: 10,
            sample: None,
            seed: 0,
            normalize: Normalization::None,
            workers: 0,
            timings: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: &str| Err(ConfigError::Invalid(msg.to_string()));
        if self.n0 == 0 || self.n0 > self.n_max {
            return fail("n-gram bounds must satisfy 1 <= n0 <= n_max");
        }
        if self.skeleton_cap == 0 {
            return fail("skeleton_cap must be at least 1");
        }
        if self.min_placeholder_len == 0 {
            return fail("min_placeholder_len must be at least 1");
        }
        if self.units.is_empty() {
            return fail("at least one unit kind must be enabled");
        }
        if !(0.0..=1.0).contains(&self.min_support) {
            return fail("min_support must lie in [0, 1]");
        }
        if self.top_k == 0 {
            return fail("top_k must be at least 1");
        }
        if self.sample == Some(0) {
            return fail("sample size must be at least 1");
        }
        Ok(())
    }

    pub fn kinds(&self) -> UnitKinds {
        self.units.iter().copied().collect()
    }

    pub fn generation(&self) -> GenerationConfig {
        GenerationConfig {
            limits: SkeletonLimits {
                max_placeholders: self.max_placeholders,
                cap: self.skeleton_cap,
                min_placeholder_len: self.min_placeholder_len,
            },
            kinds: self.kinds(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<RunConfig, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("RunConfig serializes to TOML")
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: shown.clone(),
            source,
        })?;
        RunConfig::from_toml_str(&text).map_err(|source| ConfigError::Parse { path: shown, source })
    }
}

/// Parses a comma-separated list of unit kind names, e.g. `Substr,Split`.
pub fn parse_unit_list(text: &str) -> Result<Vec<UnitKind>, String> {
    let mut out = Vec::new();
    for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind = UnitKind::from_name(name).ok_or_else(|| format!("unknown unit kind '{name}'"))?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err("empty unit list".into());
    }
    Ok(out)
}
