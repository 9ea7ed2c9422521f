//! Pheromone trails on (query, document) pairs.
//!
//! A click deposits weight on the trail between the query and the clicked
//! document; weights halve every `delta` seconds. Trails are decayed lazily:
//! each entry keeps its weight at the moment it was last touched and the
//! current weight is computed on read.

mod deposit;
mod exam;
mod keys;
mod store;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use deposit::{
    deposition_plan, derive_elaborate_order, increment_naive, increment_ranking_bias,
    PlannedDeposit,
};
pub use exam::ExaminationTable;
pub use keys::{expand_query_keys, normalize_query, KeyMode, QueryKey};
pub use store::{Candidate, PheromoneStore, TrailRecord};

/// Seconds since the Unix epoch.
pub type Timestamp = i64;

/// Half-life and pruning floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    /// Seconds for a trail to lose half its weight.
    pub delta: f64,
    /// Trails lighter than this are dropped by [`PheromoneStore::prune`].
    pub epsilon: f64,
}

impl DecayConfig {
    pub const ONE_DAY: f64 = 86_400.0;
    pub const ONE_WEEK: f64 = 604_800.0;
    pub const DEFAULT_EPSILON: f64 = 1e-6;

    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter(format!("half-life must be positive, got {delta}")));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pruning floor must be non-negative, got {epsilon}"
            )));
        }
        Ok(Self { delta, epsilon })
    }

    pub fn half_life(delta: f64) -> Result<Self> {
        Self::new(delta, Self::DEFAULT_EPSILON)
    }

    /// Exponential decay rate, ln 2 / delta.
    pub fn decay_rate(&self) -> f64 {
        std::f64::consts::LN_2 / self.delta
    }

    /// Multiplier applied to a weight after `elapsed` seconds.
    pub fn factor(&self, elapsed: f64) -> f64 {
        0.5f64.powf(elapsed / self.delta)
    }
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self { delta: Self::ONE_DAY, epsilon: Self::DEFAULT_EPSILON }
    }
}

/// Deposition strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    /// Every click deposits one unit.
    Naive,
    /// A click deposits the reciprocal of its examination probability.
    RankingBias,
    /// Clicks deposit on (document, preferred position) triplets derived
    /// with the click-over-skip-above rule.
    Elaborate,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::Naive, Flavor::RankingBias, Flavor::Elaborate];

    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Naive => "naive",
            Flavor::RankingBias => "ranking-bias",
            Flavor::Elaborate => "elaborate",
        }
    }

    /// Whether trails of this flavor are keyed by position as well.
    pub fn positional(self) -> bool {
        matches!(self, Flavor::Elaborate)
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "naive" | "naïve" => Ok(Flavor::Naive),
            "ranking-bias" | "rank-bias" | "rb" => Ok(Flavor::RankingBias),
            "elaborate" => Ok(Flavor::Elaborate),
            other => Err(Error::Config(format!("unknown flavor `{other}`"))),
        }
    }
}

/// A result document. URLs are kept verbatim, including the host-only
/// truncation found in released query logs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DocRef(String);

const PLACEHOLDER_PREFIX: &str = "urn:unobserved:";

impl DocRef {
    pub fn new(url: impl Into<String>) -> Result<Self> {
        let url = url.into();
        if url.trim().is_empty() {
            return Err(Error::InvalidParameter("empty document url".into()));
        }
        Ok(DocRef(url))
    }

    /// Stand-in for an unobserved result at `rank` on a reconstructed page.
    pub fn placeholder(rank: usize) -> Self {
        DocRef(format!("{PLACEHOLDER_PREFIX}{rank}"))
    }

    pub fn is_placeholder(&self) -> bool {
        self.0.starts_with(PLACEHOLDER_PREFIX)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for DocRef {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        DocRef::new(value)
    }
}

impl From<DocRef> for String {
    fn from(d: DocRef) -> String {
        d.0
    }
}

/// Weight of one trail as of its last update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PheromoneEntry {
    pub weight: f64,
    pub last_touch: Timestamp,
    /// Preferred position, for positional (Elaborate) trails only.
    pub position: Option<u32>,
}

/// Weight of `entry` after evaporating until `now`. Pure.
pub fn evaporated_weight(entry: &PheromoneEntry, now: Timestamp, cfg: &DecayConfig) -> Result<f64> {
    if now < entry.last_touch {
        return Err(Error::ClockSkew { last_touch: entry.last_touch, now });
    }
    Ok(entry.weight * cfg.factor((now - entry.last_touch) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(weight: f64, last_touch: Timestamp) -> PheromoneEntry {
        PheromoneEntry { weight, last_touch, position: None }
    }

    #[test]
    fn evaporation_examples() {
        let cfg = DecayConfig::half_life(DecayConfig::ONE_DAY).unwrap();
        let t0 = 1_143_849_600;
        assert_eq!(evaporated_weight(&entry(4.0, t0), t0, &cfg).unwrap(), 4.0);
        assert_eq!(evaporated_weight(&entry(4.0, t0), t0 + 2 * 86_400, &cfg).unwrap(), 1.0);
        let half = evaporated_weight(&entry(1.0, t0), t0 + 43_200, &cfg).unwrap();
        // 2^(-1/2)
        assert!((half - 0.707_106_781_186_547_5).abs() < 1e-6);
    }

    #[test]
    fn evaporation_rejects_time_travel() {
        let cfg = DecayConfig::default();
        let err = evaporated_weight(&entry(1.0, 100), 99, &cfg).unwrap_err();
        assert!(matches!(err, Error::ClockSkew { last_touch: 100, now: 99 }));
    }

    #[test]
    fn decay_config_validation() {
        assert!(DecayConfig::new(0.0, 0.0).is_err());
        assert!(DecayConfig::new(-1.0, 0.0).is_err());
        assert!(DecayConfig::new(1.0, -1e-9).is_err());
        assert!(DecayConfig::half_life(DecayConfig::ONE_WEEK).is_ok());
        let cfg = DecayConfig::half_life(DecayConfig::ONE_DAY).unwrap();
        // exponential and half-life forms agree
        let dt = 12_345.0;
        assert!(((-cfg.decay_rate() * dt).exp() - cfg.factor(dt)).abs() < 1e-15);
    }

    #[test]
    fn flavor_names_round_trip() {
        for f in Flavor::ALL {
            assert_eq!(f.as_str().parse::<Flavor>().unwrap(), f);
        }
        assert_eq!("RB".parse::<Flavor>().unwrap(), Flavor::RankingBias);
        assert!("greedy".parse::<Flavor>().is_err());
    }

    #[test]
    fn placeholders_are_recognisable() {
        assert!(DocRef::placeholder(3).is_placeholder());
        assert!(!DocRef::new("http://www.uky.edu").unwrap().is_placeholder());
        assert!(DocRef::new("  ").is_err());
    }
}
