use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::info;

use crate::error::{Error, Result};
use crate::metrics::{condensed_list, ndcg, NdcgConfig};
use crate::pheromone::{expand_query_keys, DocRef, PheromoneStore, Timestamp};
use crate::querylog::Session;

use super::config::RunConfig;
use super::inject::{alleged_clicks, inject_recommendations, reconstruct_page};

/// One replay of one test session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub session_index: usize,
    pub user_id: String,
    pub query: String,
    pub start_time: Timestamp,
    pub iteration: usize,
    pub recommended: Vec<DocRef>,
    pub injected_page: Vec<DocRef>,
    pub original_ranks: Vec<usize>,
    pub alleged_ranks: Vec<usize>,
    pub baseline_ndcg: BTreeMap<usize, f64>,
    pub sim_ndcg: BTreeMap<usize, f64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one (session, iteration) pair, so results do not depend on
/// scheduling.
pub fn iteration_seed(seed: u64, session_index: usize, iteration: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ session_index as u64) ^ iteration as u64)
}

fn scores(page_len: usize, clicks: &BTreeSet<usize>, cfg: &NdcgConfig) -> Result<BTreeMap<usize, f64>> {
    if clicks.is_empty() {
        // Nothing the user wanted is reachable any more.
        return Ok(cfg.cutoffs.iter().map(|&p| (p, 0.0)).collect());
    }
    let list = condensed_list(page_len, clicks)?;
    cfg.cutoffs.iter().map(|&p| Ok((p, ndcg(&list, p, cfg)?))).collect()
}

/// Replays every clicked test session `cfg.iterations` times against the
/// frozen `store`. Sessions without clicks have no baseline and are
/// skipped. Output is ordered by session, then iteration.
pub fn run_monte_carlo(store: &PheromoneStore, test: &[Session], cfg: &RunConfig) -> Result<Vec<SimOutcome>> {
    cfg.validate()?;
    let ndcg_cfg = NdcgConfig::new(2, cfg.cutoffs.clone())?;
    let per_session: Vec<Result<Vec<SimOutcome>>> = test
        .par_iter()
        .enumerate()
        .filter(|(_, s)| !s.clicks.is_empty())
        .map(|(idx, session)| {
            let keys = match expand_query_keys(&session.query, cfg.key_mode) {
                Ok(k) => k,
                Err(Error::InvalidQuery) => return Ok(Vec::new()),
                Err(e) => return Err(e),
            };
            let page = reconstruct_page(session);
            let original: BTreeSet<usize> = session.click_ranks().into_iter().collect();
            let baseline = scores(page.len(), &original, &ndcg_cfg)?;
            (0..cfg.iterations)
                .map(|iteration| {
                    let mut rng = ChaCha8Rng::seed_from_u64(iteration_seed(cfg.seed, idx, iteration));
                    let recommended = store.recommend(&keys, cfg.k, session.start_time, &mut rng)?;
                    let injected = inject_recommendations(&page, &recommended);
                    let alleged = alleged_clicks(&session.clicks, &injected);
                    Ok(SimOutcome {
                        session_index: idx,
                        user_id: session.user_id.clone(),
                        query: session.query.clone(),
                        start_time: session.start_time,
                        iteration,
                        recommended,
                        original_ranks: original.iter().copied().collect(),
                        sim_ndcg: scores(injected.len(), &alleged, &ndcg_cfg)?,
                        injected_page: injected,
                        alleged_ranks: alleged.into_iter().collect(),
                        baseline_ndcg: baseline.clone(),
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for chunk in per_session {
        out.extend(chunk?);
    }
    info!(run = %cfg.name(), outcomes = out.len(), "monte carlo done");
    Ok(out)
}

pub fn write_outcomes<W: Write>(outcomes: &[SimOutcome], mut out: W) -> Result<()> {
    for o in outcomes {
        let line = serde_json::to_string(o).map_err(|e| Error::Config(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_outcomes<R: BufRead>(reader: R) -> Result<Vec<SimOutcome>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pheromone::{DecayConfig, ExaminationTable, Flavor, KeyMode};
    use crate::querylog::Click;
    use crate::sim::train;

    fn doc(s: &str) -> DocRef {
        DocRef::new(s).unwrap()
    }

    fn ants(t: i64, clicks: &[(u32, &str)]) -> Session {
        Session {
            user_id: format!("u{t}"),
            query: "ants".into(),
            start_time: t,
            clicks: clicks.iter().map(|&(rank, u)| Click { rank, url: doc(u) }).collect(),
        }
    }

    fn setup(flavor: Flavor) -> (PheromoneStore, Vec<Session>, RunConfig) {
        let store = PheromoneStore::new(flavor, DecayConfig::default());
        let training = vec![ants(0, &[(10, "http://ohioline.osu.edu")])];
        train(&store, &training, KeyMode::Exact, &ExaminationTable::bundled()).unwrap();
        let test = vec![
            ants(100, &[(1, "http://www.lingolex.com"), (10, "http://ohioline.osu.edu")]),
            ants(200, &[]),
        ];
        let cfg = RunConfig { flavor, iterations: 3, seed: 9, ..RunConfig::default() };
        (store, test, cfg)
    }

    #[test]
    fn single_trail_is_always_recommended() {
        let (store, test, cfg) = setup(Flavor::Naive);
        let out = run_monte_carlo(&store, &test, &cfg).unwrap();
        assert_eq!(out.len(), 3);
        for o in &out {
            assert_eq!(o.session_index, 0);
            assert_eq!(o.recommended, vec![doc("http://ohioline.osu.edu")]);
            assert_eq!(o.alleged_ranks, vec![1, 2]);
            assert!((o.sim_ndcg[&10] - 1.0).abs() < 1e-12);
            assert!(o.baseline_ndcg[&10] < 1.0);
        }
        assert!(store.len() == 1, "testing must not deposit");
    }

    #[test]
    fn deterministic_and_round_trips() {
        let (store, test, cfg) = setup(Flavor::Elaborate);
        let a = run_monte_carlo(&store, &test, &cfg).unwrap();
        let b = run_monte_carlo(&store, &test, &cfg).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        write_outcomes(&a, &mut buf).unwrap();
        assert_eq!(read_outcomes(buf.as_slice()).unwrap(), a);
    }

    #[test]
    fn empty_store_reproduces_baseline() {
        let store = PheromoneStore::new(Flavor::Naive, DecayConfig::default());
        let (_, test, cfg) = setup(Flavor::Naive);
        for o in run_monte_carlo(&store, &test, &cfg).unwrap() {
            assert!(o.recommended.is_empty());
            assert_eq!(o.baseline_ndcg, o.sim_ndcg);
        }
    }

    #[test]
    fn seeds_differ_per_iteration() {
        let s: BTreeSet<u64> = (0..10).flat_map(|i| (0..10).map(move |j| iteration_seed(1, i, j))).collect();
        assert_eq!(s.len(), 100);
    }
}
