use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pheromone::{DocRef, ExaminationTable, Timestamp};
use crate::querylog::Interaction;

/// A population of users issuing the same query against a fixed page.
///
/// Each user scans the page top-down. Rank `r` is examined with
/// probability `p(r, last clicked rank)` from the examination table and,
/// once examined, clicked with the rank's attractiveness. The relevant
/// document is always clicked when examined.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_users: usize,
    pub page: Vec<DocRef>,
    /// 1-based rank of the relevant document.
    pub relevant_rank: usize,
    #[serde(skip, default = "ExaminationTable::bundled")]
    pub exam_table: ExaminationTable,
    pub seed: u64,
    pub query: String,
    pub start_time: Timestamp,
    /// Gap between consecutive users' queries, in seconds.
    pub interval: i64,
    /// Click probability once examined, per rank.
    pub attractiveness: Vec<f64>,
}

/// `n` distinct result URLs.
pub fn synthetic_page(n: usize) -> Vec<DocRef> {
    (1..=n)
        .map(|i| DocRef::new(format!("http://www.result{i}.example.com")).expect("non-empty"))
        .collect()
}

impl SyntheticConfig {
    /// Defaults: the top result is a tempting decoy (0.9), everything else
    /// but the relevant document is ignored.
    pub fn new(
        n_users: usize,
        page: Vec<DocRef>,
        relevant_rank: usize,
        exam_table: ExaminationTable,
        seed: u64,
    ) -> Result<Self> {
        let mut attractiveness = vec![0.0; page.len()];
        if let Some(a) = attractiveness.first_mut() {
            *a = 0.9;
        }
        let cfg = Self {
            n_users,
            page,
            relevant_rank,
            exam_table,
            seed,
            query: "synthetic query".into(),
            start_time: 1_141_171_200, // 2006-03-01
            interval: 3600,
            attractiveness,
        }
        .normalized();
        cfg.validate()?;
        Ok(cfg)
    }

    fn normalized(mut self) -> Self {
        if let Some(a) = self.attractiveness.get_mut(self.relevant_rank.wrapping_sub(1)) {
            *a = 1.0;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.page.is_empty() || self.relevant_rank < 1 || self.relevant_rank > self.page.len() {
            return Err(Error::InvalidParameter(format!(
                "relevant rank {} outside a page of {}",
                self.relevant_rank,
                self.page.len()
            )));
        }
        if self.attractiveness.len() != self.page.len()
            || self.attractiveness.iter().any(|a| !(0.0..=1.0).contains(a))
        {
            return Err(Error::InvalidParameter("attractiveness must be one value in [0, 1] per rank".into()));
        }
        if self.interval < 1 {
            return Err(Error::InvalidParameter("interval must be positive".into()));
        }
        for pos in 1..=self.page.len() as u32 {
            for last in 0..pos {
                self.exam_probability(pos, last)?;
            }
        }
        Ok(())
    }

    fn exam_probability(&self, position: u32, last_clicked: u32) -> Result<f64> {
        self.exam_table
            .get(position, last_clicked)
            .ok_or(Error::MissingExamination { position, last_clicked })
    }

    /// Exact probability that a user clicks rank `rank`, by forward
    /// recursion over the last clicked rank.
    pub fn click_probability(&self, rank: usize) -> Result<f64> {
        // state[l] = P(reach the current rank with last click at l)
        let mut state = vec![0.0; self.page.len() + 1];
        state[0] = 1.0;
        for r in 1..=rank {
            let mut clicked_here = 0.0;
            for (last, mass) in state.iter_mut().enumerate().take(r) {
                let p = self.exam_probability(r as u32, last as u32)? * self.attractiveness[r - 1];
                clicked_here += *mass * p;
                *mass *= 1.0 - p;
            }
            if r == rank {
                return Ok(clicked_here);
            }
            state[r] = clicked_here;
        }
        Ok(0.0)
    }
}

/// Generates an AOL-style log. Users without any click leave a bare query
/// row; the others leave one row per click, ten seconds apart.
pub fn gen_synthetic_log(cfg: &SyntheticConfig) -> Result<Vec<Interaction>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for user in 0..cfg.n_users {
        let user_id = (100_000 + user).to_string();
        let t0 = cfg.start_time + user as i64 * cfg.interval;
        let mut last = 0u32;
        let mut clicks = 0i64;
        for (i, doc) in cfg.page.iter().enumerate() {
            let pos = i as u32 + 1;
            let examined = rng.gen::<f64>() < cfg.exam_probability(pos, last)?;
            let clicked = rng.gen::<f64>() < cfg.attractiveness[i];
            if examined && clicked {
                rows.push(Interaction {
                    user_id: user_id.clone(),
                    query: cfg.query.clone(),
                    timestamp: t0 + 10 * clicks,
                    rank: pos,
                    url: Some(doc.clone()),
                });
                clicks += 1;
                last = pos;
            }
        }
        if clicks == 0 {
            rows.push(Interaction { user_id, query: cfg.query.clone(), timestamp: t0, rank: 0, url: None });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, relevant: usize) -> SyntheticConfig {
        SyntheticConfig::new(n, synthetic_page(10), relevant, ExaminationTable::bundled(), 5).unwrap()
    }

    // Enumerates every outcome (skipped, examined only, clicked) of the
    // ranks above `rank`.
    fn brute_force(cfg: &SyntheticConfig, rank: usize) -> f64 {
        fn go(cfg: &SyntheticConfig, r: usize, rank: usize, last: u32, mass: f64) -> f64 {
            let e = cfg.exam_table.get(r as u32, last).unwrap();
            let a = cfg.attractiveness[r - 1];
            if r == rank {
                return mass * e * a;
            }
            go(cfg, r + 1, rank, last, mass * (1.0 - e))
                + go(cfg, r + 1, rank, last, mass * e * (1.0 - a))
                + go(cfg, r + 1, rank, r as u32, mass * e * a)
        }
        go(cfg, 1, rank, 0, 1.0)
    }

    #[test]
    fn recursion_matches_enumeration() {
        let mut cfg = config(1, 4);
        cfg.attractiveness = vec![0.9, 0.3, 0.5, 1.0, 0.2, 0.0, 0.7, 0.1, 0.4, 0.6];
        for rank in 1..=8 {
            let exact = cfg.click_probability(rank).unwrap();
            assert!((exact - brute_force(&cfg, rank)).abs() < 1e-12, "rank {rank}");
        }
    }

    #[test]
    fn empirical_click_rate_matches() {
        let cfg = config(20_000, 4);
        let rows = gen_synthetic_log(&cfg).unwrap();
        let hits = rows.iter().filter(|r| r.rank == 4).count() as f64 / 20_000.0;
        let p = cfg.click_probability(4).unwrap();
        assert!((hits - p).abs() < 0.015, "{hits} vs {p}");
        let top = rows.iter().filter(|r| r.rank == 1).count() as f64 / 20_000.0;
        assert!((top - 0.9).abs() < 0.015);
        assert!(rows.iter().all(|r| r.rank == 0 || r.rank == 1 || r.rank == 4));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = config(50, 3);
        assert_eq!(gen_synthetic_log(&cfg).unwrap(), gen_synthetic_log(&cfg).unwrap());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SyntheticConfig::new(1, synthetic_page(10), 11, ExaminationTable::bundled(), 0).is_err());
        assert!(SyntheticConfig::new(1, synthetic_page(10), 2, ExaminationTable::new(), 0).is_err());
        let mut cfg = config(1, 2);
        cfg.attractiveness[5] = 1.5;
        assert!(gen_synthetic_log(&cfg).is_err());
    }
}
