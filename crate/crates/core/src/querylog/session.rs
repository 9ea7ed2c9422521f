use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::Interaction;
use crate::error::{Error, Result};
use crate::pheromone::{DocRef, QueryKey, Timestamp};

/// Actions of one user on one query closer than this share a session.
pub const DEFAULT_THRESHOLD: i64 = 30 * 60;

/// Results per result page.
pub const PAGE_SIZE: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Click {
    pub rank: u32,
    pub url: DocRef,
}

/// One query and the clicks that followed it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub user_id: String,
    pub query: String,
    pub start_time: Timestamp,
    pub clicks: Vec<Click>,
}

impl Session {
    pub fn click_ranks(&self) -> Vec<usize> {
        self.clicks.iter().map(|c| c.rank as usize).collect()
    }

    pub fn deepest_click(&self) -> Option<u32> {
        self.clicks.iter().map(|c| c.rank).max()
    }
}

/// Groups rows by (user, query) and splits each group wherever two
/// consecutive actions are `threshold` seconds or more apart.
///
/// Within a group rows are ordered by (time, rank, url), so the result does
/// not depend on input order. Rank-0 rows extend a session but add no
/// click. Sessions come back ordered by (start time, user, query).
pub fn sessionize(interactions: &[Interaction], threshold: i64) -> Vec<Session> {
    let mut groups: BTreeMap<(&str, &str), Vec<&Interaction>> = BTreeMap::new();
    for i in interactions {
        groups.entry((i.user_id.as_str(), i.query.as_str())).or_default().push(i);
    }
    let mut sessions = Vec::new();
    for ((user, query), mut rows) in groups {
        rows.sort_by(|a, b| (a.timestamp, a.rank, &a.url).cmp(&(b.timestamp, b.rank, &b.url)));
        let mut current: Option<(Session, Timestamp)> = None;
        for row in rows {
            let continues = matches!(&current, Some((_, last)) if row.timestamp - last < threshold);
            if !continues {
                sessions.extend(current.take().map(|(s, _)| s));
                current = Some((
                    Session {
                        user_id: user.to_string(),
                        query: query.to_string(),
                        start_time: row.timestamp,
                        clicks: Vec::new(),
                    },
                    row.timestamp,
                ));
            }
            let (session, last) = current.as_mut().expect("session opened above");
            *last = row.timestamp;
            if let (true, Some(url)) = (row.is_click(), &row.url) {
                session.clicks.push(Click { rank: row.rank, url: url.clone() });
            }
        }
        sessions.extend(current.map(|(s, _)| s));
    }
    sessions.sort_by(|a, b| (a.start_time, &a.user_id, &a.query).cmp(&(b.start_time, &b.user_id, &b.query)));
    sessions
}

/// Drops rows identical to the row immediately before them.
pub fn dedup_consecutive(rows: Vec<Interaction>) -> Vec<Interaction> {
    let mut out: Vec<Interaction> = Vec::with_capacity(rows.len());
    for row in rows {
        if out.last() != Some(&row) {
            out.push(row);
        }
    }
    out
}

/// Queries selected for evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSubset {
    /// Issued at least once a day on average.
    pub frequent: BTreeSet<QueryKey>,
    /// Most sessions stayed on the first result page.
    pub easy: BTreeSet<QueryKey>,
    /// Most sessions clicked beyond the first result page.
    pub difficult: BTreeSet<QueryKey>,
    pub union: BTreeSet<QueryKey>,
}

/// Days covered by the sessions, counting first and last day.
pub fn span_days(sessions: &[Session]) -> u32 {
    let days = sessions.iter().map(|s| s.start_time.div_euclid(86_400));
    match (days.clone().min(), days.max()) {
        (Some(lo), Some(hi)) => (hi - lo + 1) as u32,
        _ => 0,
    }
}

/// Selects frequent, easy and difficult queries. Each session counts as
/// one issue of its query; sessions without clicks count in the
/// denominators of the easy/difficult majorities only.
pub fn filter_dataset(sessions: &[Session], span_days: u32) -> Result<DatasetSubset> {
    if span_days < 1 {
        return Err(Error::InvalidParameter("span_days must be at least 1".into()));
    }
    #[derive(Default)]
    struct Tally {
        sessions: u64,
        first_page: u64,
        beyond: u64,
    }
    let mut tallies: BTreeMap<QueryKey, Tally> = BTreeMap::new();
    for s in sessions {
        let Ok(key) = QueryKey::new(&s.query) else { continue };
        let t = tallies.entry(key).or_default();
        t.sessions += 1;
        if s.clicks.is_empty() {
            continue;
        }
        if s.clicks.iter().all(|c| c.rank <= PAGE_SIZE) {
            t.first_page += 1;
        } else {
            t.beyond += 1;
        }
    }
    let mut subset = DatasetSubset::default();
    for (key, t) in tallies {
        if t.sessions >= u64::from(span_days) {
            subset.frequent.insert(key.clone());
        }
        if 2 * t.first_page > t.sessions {
            subset.easy.insert(key.clone());
        }
        if 2 * t.beyond > t.sessions {
            subset.difficult.insert(key.clone());
        }
    }
    subset.union = subset
        .frequent
        .iter()
        .chain(&subset.easy)
        .chain(&subset.difficult)
        .cloned()
        .collect();
    Ok(subset)
}

/// Sessions whose normalized query is in `keys`.
pub fn restrict_to(sessions: &[Session], keys: &BTreeSet<QueryKey>) -> Vec<Session> {
    sessions
        .iter()
        .filter(|s| QueryKey::new(&s.query).map(|k| keys.contains(&k)).unwrap_or(false))
        .cloned()
        .collect()
}

/// Sessions starting before `split` train; the rest test. Both halves are
/// in chronological order.
pub fn partition(sessions: &[Session], split: Timestamp) -> (Vec<Session>, Vec<Session>) {
    let mut sorted = sessions.to_vec();
    sorted.sort_by_key(|s| s.start_time);
    sorted.into_iter().partition(|s| s.start_time < split)
}

pub fn write_sessions<W: Write>(sessions: &[Session], mut out: W) -> Result<()> {
    for s in sessions {
        serde_json::to_writer(&mut out, s).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_sessions<R: BufRead>(reader: R) -> Result<Vec<Session>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(idx + 1, e.to_string()))?);
    }
    Ok(out)
}
