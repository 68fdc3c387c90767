//! Run configuration, loaded from an optional TOML file and overridden by flags.

use std::path::{Path, PathBuf};

use num_traits::Signed;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::beilinson::SignReading;
use crate::chern::{fmt_q, parse_q, q, Q};
use crate::error::{Error, Result};
use crate::extremal::ScanConfig;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "EFFCONE_CACHE_DIR";

/// Output format of the command-line tool.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Tex,
}

/// Parameters shared by every computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Largest rank of exceptional bundles generated.
    pub rank_bound: i64,
    /// Grid step of the scan along the curve `Q_xi = 1/2`.
    #[serde(serialize_with = "ser_q", deserialize_with = "de_q")]
    pub scan_step: Q,
    /// Integer cells added on each side of the scanned region.
    pub padding: i64,
    /// Largest number of twist classes allowed during generation.
    pub cap: usize,
    pub output: OutputFormat,
    /// Directory holding cached databases; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
    pub sign_reading: SignReading,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            rank_bound: 50,
            scan_step: q(1, 64),
            padding: 4,
            cap: 200_000,
            output: OutputFormat::Text,
            cache_dir: None,
            sign_reading: SignReading::Mirrored,
        }
    }
}

fn ser_q<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

fn de_q<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
    let s = String::deserialize(d)?;
    parse_q(&s).map_err(serde::de::Error::custom)
}

impl Config {
    /// Parses a TOML document; unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks that every bound is positive.
    pub fn validate(&self) -> Result<()> {
        if self.rank_bound < 1 {
            return Err(Error::Parse("rank_bound must be positive".into()));
        }
        if !self.scan_step.is_positive() {
            return Err(Error::Parse("scan_step must be positive".into()));
        }
        if self.padding < 1 {
            return Err(Error::Parse("padding must be positive".into()));
        }
        if self.cap < 1 {
            return Err(Error::Parse("cap must be positive".into()));
        }
        Ok(())
    }

    /// The cache directory, with the environment variable taking precedence.
    pub fn effective_cache_dir(&self) -> Option<PathBuf> {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(v) if !v.is_empty() => Some(PathBuf::from(v)),
            _ => self.cache_dir.clone(),
        }
    }

    pub fn scan(&self) -> ScanConfig {
        ScanConfig {
            step: self.scan_step.clone(),
            padding: self.padding,
            ..ScanConfig::default()
        }
    }
}
