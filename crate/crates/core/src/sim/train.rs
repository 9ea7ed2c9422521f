use serde::{Deserialize, Serialize};
use tracing::debug;

use crate::error::{Error, Result};
use crate::pheromone::{deposition_plan, expand_query_keys, ExaminationTable, KeyMode, PheromoneStore};
use crate::querylog::Session;

use super::inject::reconstruct_page;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainStats {
    pub sessions: usize,
    pub deposits: usize,
}

/// Replays `sessions` in chronological order, depositing at each session's
/// start time. Out-of-order input is rejected rather than sorted, since
/// lazy evaporation cannot run backwards.
pub fn train(
    store: &PheromoneStore,
    sessions: &[Session],
    key_mode: KeyMode,
    table: &ExaminationTable,
) -> Result<TrainStats> {
    if let Some(i) = sessions.windows(2).position(|w| w[1].start_time < w[0].start_time) {
        return Err(Error::Unordered(i + 1));
    }
    let mut stats = TrainStats::default();
    for session in sessions.iter().filter(|s| !s.clicks.is_empty()) {
        let keys = match expand_query_keys(&session.query, key_mode) {
            Ok(keys) => keys,
            Err(Error::InvalidQuery) => continue,
            Err(e) => return Err(e),
        };
        let page = reconstruct_page(session);
        let plan = deposition_plan(store.flavor(), &page, &session.click_ranks(), Some(table))?;
        for key in &keys {
            for d in &plan {
                store.deposit(key, &d.doc, d.position, d.increment, session.start_time)?;
                stats.deposits += 1;
            }
        }
        stats.sessions += 1;
    }
    debug!(sessions = stats.sessions, deposits = stats.deposits, "training done");
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pheromone::{DecayConfig, DocRef, Flavor, QueryKey};
    use crate::querylog::Click;

    fn session(t: i64, rank: u32, url: &str) -> Session {
        Session {
            user_id: "1".into(),
            query: "ants".into(),
            start_time: t,
            clicks: vec![Click { rank, url: DocRef::new(url).unwrap() }],
        }
    }

    #[test]
    fn deposits_decay_between_sessions() {
        let store = PheromoneStore::new(Flavor::Naive, DecayConfig::default());
        let table = ExaminationTable::bundled();
        let d = DecayConfig::ONE_DAY as i64;
        let stats = train(&store, &[session(0, 1, "http://a"), session(d, 3, "http://a")], KeyMode::Exact, &table)
            .unwrap();
        assert_eq!(stats, TrainStats { sessions: 2, deposits: 2 });
        let w = store.weight(&QueryKey::new("ants").unwrap(), &DocRef::new("http://a").unwrap(), d);
        assert!((w - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_unordered_sessions() {
        let store = PheromoneStore::new(Flavor::Naive, DecayConfig::default());
        let table = ExaminationTable::bundled();
        let err = train(&store, &[session(10, 1, "http://a"), session(5, 1, "http://a")], KeyMode::Exact, &table);
        assert!(matches!(err, Err(Error::Unordered(1))));
        assert!(store.is_empty());
    }

    #[test]
    fn ngram_mode_deposits_under_every_subphrase() {
        let store = PheromoneStore::new(Flavor::Naive, DecayConfig::default());
        let table = ExaminationTable::bundled();
        let mut s = session(0, 1, "http://a");
        s.query = "fire ants".into();
        let stats = train(&store, &[s], KeyMode::Ngram, &table).unwrap();
        assert_eq!(stats.deposits, 3);
    }
}
