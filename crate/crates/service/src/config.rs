use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use swarmsearch_core::pheromone::{DecayConfig, Flavor, KeyMode};

use crate::error::{Result, ServiceError};

/// Prefix of environment variables overriding config keys, e.g.
/// `SWARMSEARCH_K=5`.
pub const ENV_PREFIX: &str = "SWARMSEARCH_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    LocalIndex,
    Fixture,
}

impl FromStr for ProviderKind {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "local-index" | "local" | "index" => Ok(Self::LocalIndex),
            "fixture" | "fixtures" => Ok(Self::Fixture),
            other => Err(ServiceError::Config(format!("unknown provider `{other}`"))),
        }
    }
}

impl fmt::Display for ProviderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LocalIndex => "local-index",
            Self::Fixture => "fixture",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub flavor: Flavor,
    pub delta: f64,
    pub epsilon: f64,
    /// Recommendations injected on page 1, when available.
    pub k: usize,
    pub key_mode: KeyMode,
    pub provider: ProviderKind,
    /// Corpus directory or fixture directory.
    pub provider_path: PathBuf,
    pub log_path: Option<PathBuf>,
    pub exam_table: Option<PathBuf>,
    /// Trail snapshot loaded at start and written on shutdown.
    pub snapshot: Option<PathBuf>,
    pub seed: u64,
    pub bind: String,
    /// Click-token signing key; random per process when unset.
    pub secret: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            flavor: Flavor::Naive,
            delta: DecayConfig::ONE_DAY,
            epsilon: DecayConfig::DEFAULT_EPSILON,
            k: 3,
            key_mode: KeyMode::Ngram,
            provider: ProviderKind::LocalIndex,
            provider_path: PathBuf::from("corpus"),
            log_path: None,
            exam_table: None,
            snapshot: None,
            seed: 0,
            bind: "127.0.0.1:8080".into(),
            secret: None,
        }
    }
}

fn opt_path(v: &str) -> Option<PathBuf> {
    (!v.is_empty()).then(|| PathBuf::from(v))
}

impl ServiceConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| ServiceError::Config(format!("bad {what} `{value}`"));
        match key.trim().to_ascii_lowercase().as_str() {
            "flavor" => self.flavor = value.parse()?,
            "delta" => self.delta = value.parse().map_err(|_| bad("delta"))?,
            "epsilon" => self.epsilon = value.parse().map_err(|_| bad("epsilon"))?,
            "k" => self.k = value.parse().map_err(|_| bad("k"))?,
            "key_mode" => self.key_mode = value.parse()?,
            "provider" => self.provider = value.parse()?,
            "provider_path" => self.provider_path = PathBuf::from(value),
            "log_path" => self.log_path = opt_path(value),
            "exam_table" => self.exam_table = opt_path(value),
            "snapshot" => self.snapshot = opt_path(value),
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "bind" => self.bind = value.to_string(),
            "secret" => self.secret = (!value.is_empty()).then(|| value.to_string()),
            other => return Err(ServiceError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// `key=value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ServiceError::Config(format!("line {}: expected key=value", i + 1)))?;
            self.set(k, v.trim())?;
        }
        Ok(())
    }

    /// Applies `SWARMSEARCH_<KEY>` overrides from `vars`.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            if let Some(key) = k.as_ref().strip_prefix(ENV_PREFIX) {
                self.set(key, v.as_ref())?;
            }
        }
        Ok(())
    }

    /// Defaults, then the optional file, then the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| ServiceError::io(p, e))?;
            cfg.apply_text(&text)?;
        }
        cfg.apply_env(std::env::vars())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=10).contains(&self.k) {
            return Err(ServiceError::Config(format!("k must be in 1..=10, got {}", self.k)));
        }
        DecayConfig::new(self.delta, self.epsilon)?;
        Ok(())
    }

    pub fn decay(&self) -> DecayConfig {
        DecayConfig { delta: self.delta, epsilon: self.epsilon }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_live_setup() {
        let cfg = ServiceConfig::default();
        assert_eq!(cfg.k, 3);
        assert_eq!(cfg.key_mode, KeyMode::Ngram);
        assert_eq!(cfg.flavor, Flavor::Naive);
    }

    #[test]
    fn file_then_env() {
        let mut cfg = ServiceConfig::parse("k = 5\nprovider=fixture # canned\nprovider_path=fx\n").unwrap();
        assert_eq!((cfg.k, cfg.provider), (5, ProviderKind::Fixture));
        cfg.apply_env([("SWARMSEARCH_K", "2"), ("HOME", "/root"), ("SWARMSEARCH_FLAVOR", "elaborate")]).unwrap();
        assert_eq!((cfg.k, cfg.flavor), (2, Flavor::Elaborate));
    }

    #[test]
    fn k_bounds() {
        assert!(ServiceConfig::parse("k=0").is_err());
        assert!(ServiceConfig::parse("k=11").is_err());
        assert!(ServiceConfig::parse("k=10").is_ok());
        assert!(ServiceConfig::parse("bogus=1").is_err());
    }
}
