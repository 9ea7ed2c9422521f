use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::mem::size_of;

use parking_lot::RwLock;
use rand::Rng;

use super::{evaporated_weight, DecayConfig, DocRef, Flavor, PheromoneEntry, QueryKey, Timestamp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Trail {
    doc: DocRef,
    position: Option<u32>,
}

type Trails = HashMap<QueryKey, HashMap<Trail, PheromoneEntry>>;

/// All trails of one flavor.
///
/// Readers share a lock; each deposit or prune holds the write lock for the
/// duration of one update, so a concurrent reader sees an entry either
/// before or after a deposit, never in between.
#[derive(Debug)]
pub struct PheromoneStore {
    flavor: Flavor,
    decay: DecayConfig,
    trails: RwLock<Trails>,
}

/// A flattened trail, as written to snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct TrailRecord {
    pub key: QueryKey,
    pub doc: DocRef,
    pub entry: PheromoneEntry,
}

/// A document eligible for recommendation with its current total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub doc: DocRef,
    pub weight: f64,
    /// Weight-averaged preferred position (positional trails only).
    pub mean_position: Option<f64>,
}

impl PheromoneStore {
    pub fn new(flavor: Flavor, decay: DecayConfig) -> Self {
        Self { flavor, decay, trails: RwLock::new(HashMap::new()) }
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn decay(&self) -> DecayConfig {
        self.decay
    }

    /// Evaporates the trail up to `now`, then adds `increment`.
    pub fn deposit(
        &self,
        key: &QueryKey,
        doc: &DocRef,
        position: Option<u32>,
        increment: f64,
        now: Timestamp,
    ) -> Result<PheromoneEntry> {
        if !(increment.is_finite() && increment > 0.0) {
            return Err(Error::InvalidIncrement(increment));
        }
        if position.is_some() != self.flavor.positional() {
            return Err(Error::FlavorKey { flavor: self.flavor, has_position: position.is_some() });
        }
        if position == Some(0) {
            return Err(Error::InvalidParameter("positions are 1-based".into()));
        }
        let trail = Trail { doc: doc.clone(), position };
        let mut trails = self.trails.write();
        let slot = trails.entry(key.clone()).or_default();
        let current = match slot.get(&trail) {
            Some(old) => evaporated_weight(old, now, &self.decay)?,
            None => 0.0,
        };
        let entry = PheromoneEntry { weight: current + increment, last_touch: now, position };
        slot.insert(trail, entry);
        Ok(entry)
    }

    pub fn get(&self, key: &QueryKey, doc: &DocRef, position: Option<u32>) -> Option<PheromoneEntry> {
        let trail = Trail { doc: doc.clone(), position };
        self.trails.read().get(key).and_then(|m| m.get(&trail)).copied()
    }

    /// Current weight of `doc` under `key`, summed over positions.
    pub fn weight(&self, key: &QueryKey, doc: &DocRef, now: Timestamp) -> f64 {
        let trails = self.trails.read();
        trails
            .get(key)
            .map(|m| {
                m.iter()
                    .filter(|(t, _)| &t.doc == doc)
                    .map(|(_, e)| self.weight_on_read(e, now))
                    .sum()
            })
            .unwrap_or(0.0)
    }

    // Entries touched after `now` (a reader with a lagging clock) are read
    // undecayed rather than failing the whole recommendation.
    fn weight_on_read(&self, entry: &PheromoneEntry, now: Timestamp) -> f64 {
        evaporated_weight(entry, now.max(entry.last_touch), &self.decay).unwrap_or(0.0)
    }

    /// Documents with positive weight under any of `keys`, sorted by URL.
    pub fn candidates<'a, I>(&self, keys: I, now: Timestamp) -> Vec<Candidate>
    where
        I: IntoIterator<Item = &'a QueryKey>,
    {
        let keys: BTreeSet<&QueryKey> = keys.into_iter().collect();
        let trails = self.trails.read();
        let mut acc: BTreeMap<&DocRef, (f64, f64)> = BTreeMap::new();
        for key in keys {
            let Some(m) = trails.get(key) else { continue };
            for (trail, entry) in m {
                let w = self.weight_on_read(entry, now);
                let slot = acc.entry(&trail.doc).or_insert((0.0, 0.0));
                slot.0 += w;
                slot.1 += w * f64::from(trail.position.unwrap_or(0));
            }
        }
        let positional = self.flavor.positional();
        acc.into_iter()
            .filter(|(_, (w, _))| *w > 0.0 && w.is_finite())
            .map(|(doc, (w, pos))| Candidate {
                doc: doc.clone(),
                weight: w,
                mean_position: positional.then(|| pos / w),
            })
            .collect()
    }

    /// Draws up to `k` distinct documents; each draw picks a remaining
    /// candidate with probability proportional to its weight.
    ///
    /// For positional trails the drawn documents are returned heaviest
    /// first, ties going to the lower mean preferred position. Otherwise
    /// they come back in draw order.
    pub fn recommend<'a, I, R>(&self, keys: I, k: usize, now: Timestamp, rng: &mut R) -> Result<Vec<DocRef>>
    where
        I: IntoIterator<Item = &'a QueryKey>,
        R: Rng + ?Sized,
    {
        if k < 1 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let mut pool = self.candidates(keys, now);
        let mut picked = Vec::with_capacity(k.min(pool.len()));
        while picked.len() < k && !pool.is_empty() {
            let total: f64 = pool.iter().map(|c| c.weight).sum();
            let mut target = rng.gen::<f64>() * total;
            let mut idx = pool.len() - 1;
            for (i, c) in pool.iter().enumerate() {
                if target < c.weight {
                    idx = i;
                    break;
                }
                target -= c.weight;
            }
            picked.push(pool.remove(idx));
        }
        if self.flavor.positional() {
            picked.sort_by(|a, b| {
                b.weight
                    .total_cmp(&a.weight)
                    .then(a.mean_position.unwrap_or(0.0).total_cmp(&b.mean_position.unwrap_or(0.0)))
            });
        }
        Ok(picked.into_iter().map(|c| c.doc).collect())
    }

    /// Drops every trail whose weight at `now` is below the floor.
    pub fn prune(&self, now: Timestamp) -> usize {
        let mut trails = self.trails.write();
        let mut removed = 0;
        for m in trails.values_mut() {
            let before = m.len();
            m.retain(|_, e| self.weight_on_read(e, now) >= self.decay.epsilon);
            removed += before - m.len();
        }
        trails.retain(|_, m| !m.is_empty());
        removed
    }

    pub fn len(&self) -> usize {
        self.trails.read().values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rough heap footprint of the stored trails.
    pub fn approx_bytes(&self) -> usize {
        let trails = self.trails.read();
        trails
            .iter()
            .map(|(key, m)| {
                key.as_str().len()
                    + size_of::<QueryKey>()
                    + m.keys()
                        .map(|t| t.doc.as_str().len() + size_of::<Trail>() + size_of::<PheromoneEntry>())
                        .sum::<usize>()
            })
            .sum()
    }

    /// Every trail, sorted by (key, url, position).
    pub fn records(&self) -> Vec<TrailRecord> {
        let trails = self.trails.read();
        let mut out: Vec<TrailRecord> = trails
            .iter()
            .flat_map(|(key, m)| {
                m.iter().map(move |(t, e)| TrailRecord { key: key.clone(), doc: t.doc.clone(), entry: *e })
            })
            .collect();
        out.sort_by(|a, b| {
            (&a.key, &a.doc, a.entry.position).cmp(&(&b.key, &b.doc, b.entry.position))
        });
        out
    }

    /// Writes `query_key \t url \t position|- \t weight \t last_touch` lines.
    pub fn save_snapshot<W: Write>(&self, mut out: W) -> Result<()> {
        for r in self.records() {
            let pos = r.entry.position.map_or_else(|| "-".to_string(), |p| p.to_string());
            writeln!(out, "{}\t{}\t{}\t{}\t{}", r.key, r.doc, pos, r.entry.weight, r.entry.last_touch)?;
        }
        Ok(())
    }

    pub fn load_snapshot<R: BufRead>(flavor: Flavor, decay: DecayConfig, reader: R) -> Result<Self> {
        let store = Self::new(flavor, decay);
        {
            let mut trails = store.trails.write();
            for (idx, line) in reader.lines().enumerate() {
                let line = line?;
                let line_no = idx + 1;
                if line.trim().is_empty() {
                    continue;
                }
                let f: Vec<&str> = line.split('\t').collect();
                if f.len() != 5 {
                    return Err(Error::parse(line_no, format!("expected 5 fields, found {}", f.len())));
                }
                let key = QueryKey::new(f[0]).map_err(|e| Error::parse(line_no, e.to_string()))?;
                if key.as_str() != f[0] {
                    return Err(Error::parse(line_no, "query key is not normalized"));
                }
                let doc = DocRef::new(f[1]).map_err(|e| Error::parse(line_no, e.to_string()))?;
                let position = match f[2] {
                    "-" => None,
                    p => Some(
                        p.parse::<u32>()
                            .ok()
                            .filter(|&p| p > 0)
                            .ok_or_else(|| Error::parse(line_no, format!("bad position `{p}`")))?,
                    ),
                };
                if position.is_some() != flavor.positional() {
                    return Err(Error::parse(
                        line_no,
                        Error::FlavorKey { flavor, has_position: position.is_some() }.to_string(),
                    ));
                }
                let weight = f[3]
                    .parse::<f64>()
                    .ok()
                    .filter(|w| w.is_finite() && *w >= 0.0)
                    .ok_or_else(|| Error::parse(line_no, format!("bad weight `{}`", f[3])))?;
                let last_touch = f[4]
                    .parse::<Timestamp>()
                    .map_err(|e| Error::parse(line_no, format!("bad timestamp: {e}")))?;
                trails
                    .entry(key)
                    .or_default()
                    .insert(Trail { doc, position }, PheromoneEntry { weight, last_touch, position });
            }
        }
        Ok(store)
    }
}

impl Clone for PheromoneStore {
    fn clone(&self) -> Self {
        Self { flavor: self.flavor, decay: self.decay, trails: RwLock::new(self.trails.read().clone()) }
    }
}
