use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pheromone::Timestamp;

/// One nDCG value for one session at one cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub query: String,
    pub user_id: String,
    pub session_time: Timestamp,
    pub cutoff: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    User,
    Query,
}

fn at_cutoff(records: &[ScoreRecord], cutoff: usize) -> impl Iterator<Item = &ScoreRecord> {
    records.iter().filter(move |r| r.cutoff == cutoff)
}

/// Mean over every record at `cutoff`.
pub fn micro_average(records: &[ScoreRecord], cutoff: usize) -> Result<f64> {
    let (sum, n) = at_cutoff(records, cutoff).fold((0.0, 0usize), |(s, n), r| (s + r.value, n + 1));
    if n == 0 {
        return Err(Error::NoData(format!("no scores at cutoff {cutoff}")));
    }
    Ok(sum / n as f64)
}

/// Mean of per-group means at `cutoff`.
pub fn macro_average(records: &[ScoreRecord], group_by: GroupBy, cutoff: usize) -> Result<f64> {
    let mut groups: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in at_cutoff(records, cutoff) {
        let key = match group_by {
            GroupBy::User => r.user_id.as_str(),
            GroupBy::Query => r.query.as_str(),
        };
        let g = groups.entry(key).or_insert((0.0, 0));
        g.0 += r.value;
        g.1 += 1;
    }
    if groups.is_empty() {
        return Err(Error::NoData(format!("no scores at cutoff {cutoff}")));
    }
    let n = groups.len() as f64;
    Ok(groups.values().map(|(s, c)| s / *c as f64).sum::<f64>() / n)
}
