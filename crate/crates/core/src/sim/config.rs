use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pheromone::{DecayConfig, Flavor, KeyMode, Timestamp};
use crate::querylog::{format_timestamp, parse_timestamp};

/// One offline run. Read from and written to `key=value` lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub flavor: Flavor,
    /// Half-life in seconds.
    pub delta: f64,
    /// Recommendations injected per result page.
    pub k: usize,
    /// Sessions starting before this instant train, the rest test.
    pub partition: Timestamp,
    pub iterations: usize,
    pub seed: u64,
    pub key_mode: KeyMode,
    pub epsilon: f64,
    pub cutoffs: Vec<usize>,
}

/// 2006-04-01 00:00:00 UTC: train on March, test on April and May.
pub const SPLIT_APRIL: Timestamp = 1_143_849_600;
/// 2006-05-01 00:00:00 UTC: train on March and April, test on May.
pub const SPLIT_MAY: Timestamp = 1_146_441_600;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            flavor: Flavor::Naive,
            delta: DecayConfig::ONE_DAY,
            k: 1,
            partition: SPLIT_MAY,
            iterations: 10,
            seed: 0,
            key_mode: KeyMode::Exact,
            epsilon: DecayConfig::DEFAULT_EPSILON,
            cutoffs: vec![1, 3, 10],
        }
    }
}

fn parse_instant(value: &str) -> Option<Timestamp> {
    let v = value.trim();
    v.parse::<Timestamp>()
        .ok()
        .or_else(|| parse_timestamp(v))
        .or_else(|| parse_timestamp(&format!("{v} 00:00:00")))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        DecayConfig::new(self.delta, self.epsilon)?;
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        crate::metrics::NdcgConfig::new(2, self.cutoffs.clone())?;
        Ok(())
    }

    pub fn decay(&self) -> DecayConfig {
        DecayConfig { delta: self.delta, epsilon: self.epsilon }
    }

    /// Parses `key=value` lines; `#` starts a comment. Unset keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", idx + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", idx + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad {what} `{value}`"));
        match key {
            "flavor" => self.flavor = value.parse()?,
            "delta" => self.delta = value.parse().map_err(|_| bad("delta"))?,
            "k" => self.k = value.parse().map_err(|_| bad("k"))?,
            "partition" => self.partition = parse_instant(value).ok_or_else(|| bad("partition"))?,
            "iterations" => self.iterations = value.parse().map_err(|_| bad("iterations"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "key_mode" => self.key_mode = value.parse()?,
            "epsilon" => self.epsilon = value.parse().map_err(|_| bad("epsilon"))?,
            "cutoffs" => {
                self.cutoffs = value
                    .split(',')
                    .map(|c| c.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("cutoffs"))?
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "flavor={}", self.flavor);
        let _ = writeln!(out, "delta={}", self.delta);
        let _ = writeln!(out, "k={}", self.k);
        let _ = writeln!(out, "partition={}", format_timestamp(self.partition));
        let _ = writeln!(out, "iterations={}", self.iterations);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "key_mode={}", self.key_mode);
        let _ = writeln!(out, "epsilon={}", self.epsilon);
        let cutoffs: Vec<String> = self.cutoffs.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "cutoffs={}", cutoffs.join(","));
        out
    }

    /// Short stable name, usable as a file stem.
    pub fn name(&self) -> String {
        let split = format_timestamp(self.partition);
        format!("{}_d{}_k{}_{}", self.flavor, self.delta, self.k, &split[..10])
    }

    /// Flavors x half-lives (day, week) x k (1, 3) x splits (April, May):
    /// 24 runs.
    pub fn preset_matrix(seed: u64) -> Vec<RunConfig> {
        let mut runs = Vec::with_capacity(24);
        for flavor in Flavor::ALL {
            for delta in [DecayConfig::ONE_DAY, DecayConfig::ONE_WEEK] {
                for k in [1, 3] {
                    for partition in [SPLIT_APRIL, SPLIT_MAY] {
                        runs.push(RunConfig { flavor, delta, k, partition, seed, ..RunConfig::default() });
                    }
                }
            }
        }
        runs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        let cfg = RunConfig::parse(
            "# best run\nflavor = ranking-bias\ndelta=604800\nk=3\npartition=2006-04-01\niterations=5\nseed=7\nkey_mode=ngram\n",
        )
        .unwrap();
        assert_eq!(cfg.flavor, Flavor::RankingBias);
        assert_eq!(cfg.partition, SPLIT_APRIL);
        assert_eq!(cfg.key_mode, KeyMode::Ngram);
        assert_eq!(RunConfig::parse(&cfg.to_kv()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::parse("k=0").is_err());
        assert!(RunConfig::parse("iterations=0").is_err());
        assert!(RunConfig::parse("delta=-5").is_err());
        assert!(RunConfig::parse("colour=blue").is_err());
        assert!(RunConfig::parse("flavor").is_err());
        assert!(RunConfig::parse("partition=yesterday").is_err());
        assert!(RunConfig::parse("cutoffs=3,1").is_err());
    }

    #[test]
    fn preset_matrix_has_24_distinct_runs() {
        let runs = RunConfig::preset_matrix(1);
        assert_eq!(runs.len(), 24);
        let names: std::collections::BTreeSet<String> = runs.iter().map(RunConfig::name).collect();
        assert_eq!(names.len(), 24);
        assert!(runs.iter().all(|r| r.iterations == 10 && r.validate().is_ok()));
        assert_eq!(format_timestamp(SPLIT_MAY), "2006-05-01 00:00:00");
    }
}
