use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::{Mutex, RwLock};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use swarmsearch_core::pheromone::{
    expand_query_keys, increment_naive, increment_ranking_bias, DocRef, ExaminationTable, Flavor, PheromoneStore,
    Timestamp,
};
use swarmsearch_core::sim::inject_recommendations;
use tracing::{debug, warn};

use crate::config::{ProviderKind, ServiceConfig};
use crate::error::{Result, ServiceError};
use crate::log::{InteractionLog, LogRow};
use crate::provider::{FixtureProvider, LocalIndex, Provider, UpstreamPage, PAGE_SIZE};

/// Served pages remembered for click attribution.
const SERVED_CAPACITY: usize = 65_536;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerpResult {
    pub rank: u32,
    pub url: DocRef,
    pub title: String,
    pub snippet: String,
    pub click_token: String,
    /// Kept server-side only so recommended and organic entries look alike.
    #[serde(skip)]
    pub recommended: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerpPage {
    pub query: String,
    pub page: u32,
    pub results: Vec<SerpResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub queries: u64,
    pub clicks: u64,
    pub trails: usize,
    pub store_bytes: usize,
}

struct Served {
    user: String,
    query: String,
    page: u32,
    docs: Vec<DocRef>,
    recommended: Vec<bool>,
    tokens: Vec<String>,
    clicked: BTreeSet<usize>,
}

#[derive(Default)]
struct ServedPages {
    pages: HashMap<u64, Served>,
    order: VecDeque<u64>,
    /// nonce -> (serve id, index on the page)
    tokens: HashMap<String, (u64, usize)>,
}

/// Search front end: fetches upstream results, injects recommendations on
/// page 1, and turns clicks into deposits.
pub struct SearchEngine {
    cfg: ServiceConfig,
    store: PheromoneStore,
    provider: Box<dyn Provider>,
    table: ExaminationTable,
    log: InteractionLog,
    secret: Vec<u8>,
    rng: Mutex<ChaCha8Rng>,
    served: Mutex<ServedPages>,
    next_serve: AtomicU64,
    metadata: RwLock<HashMap<DocRef, (String, String)>>,
    queries: AtomicU64,
    clicks: AtomicU64,
}

fn sign(secret: &[u8], nonce: &str) -> String {
    let mut h = Sha256::new();
    h.update(secret);
    h.update(nonce.as_bytes());
    hex::encode(&h.finalize()[..16])
}

impl SearchEngine {
    pub fn new(cfg: ServiceConfig, provider: Box<dyn Provider>, log: InteractionLog) -> Result<Self> {
        cfg.validate()?;
        let table = match &cfg.exam_table {
            Some(p) => ExaminationTable::load(p)?,
            None => ExaminationTable::bundled(),
        };
        let store = match cfg.snapshot.as_deref().filter(|p| p.exists()) {
            Some(p) => {
                let file = std::fs::File::open(p).map_err(|e| ServiceError::io(p, e))?;
                PheromoneStore::load_snapshot(cfg.flavor, cfg.decay(), std::io::BufReader::new(file))?
            }
            None => PheromoneStore::new(cfg.flavor, cfg.decay()),
        };
        let secret = match &cfg.secret {
            Some(s) => s.as_bytes().to_vec(),
            None => {
                let mut b = vec![0u8; 32];
                rand::thread_rng().fill_bytes(&mut b);
                b
            }
        };
        Ok(Self {
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(cfg.seed)),
            cfg,
            store,
            provider,
            table,
            log,
            secret,
            served: Mutex::new(ServedPages::default()),
            next_serve: AtomicU64::new(0),
            metadata: RwLock::new(HashMap::new()),
            queries: AtomicU64::new(0),
            clicks: AtomicU64::new(0),
        })
    }

    /// Builds the provider and log named by `cfg`.
    pub fn from_config(cfg: ServiceConfig) -> Result<Self> {
        let provider: Box<dyn Provider> = match cfg.provider {
            ProviderKind::Fixture => Box::new(FixtureProvider::load(&cfg.provider_path)?),
            ProviderKind::LocalIndex => Box::new(LocalIndex::open(&cfg.provider_path)?),
        };
        let log = match &cfg.log_path {
            Some(p) => InteractionLog::open(p)?,
            None => InteractionLog::disabled(),
        };
        Self::new(cfg, provider, log)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.cfg
    }

    pub fn store(&self) -> &PheromoneStore {
        &self.store
    }

    pub fn log(&self) -> &InteractionLog {
        &self.log
    }

    pub fn stats(&self) -> Stats {
        Stats {
            queries: self.queries.load(Ordering::Relaxed),
            clicks: self.clicks.load(Ordering::Relaxed),
            trails: self.store.len(),
            store_bytes: self.store.approx_bytes(),
        }
    }

    pub fn save_snapshot(&self) -> Result<()> {
        if let Some(p) = &self.cfg.snapshot {
            let file = std::fs::File::create(p).map_err(|e| ServiceError::io(p, e))?;
            self.store.save_snapshot(std::io::BufWriter::new(file))?;
        }
        Ok(())
    }

    fn new_token(&self) -> String {
        let nonce: [u8; 16] = rand::thread_rng().gen();
        let nonce = hex::encode(nonce);
        let sig = sign(&self.secret, &nonce);
        format!("{nonce}.{sig}")
    }

    pub fn handle_search(&self, query: &str, page: u32, user: &str, now: Timestamp) -> Result<SerpPage> {
        if page < 1 {
            return Err(ServiceError::BadPage);
        }
        let keys = expand_query_keys(query, self.cfg.key_mode)?;
        let upstream = match self.provider.search(query, page) {
            Ok(p) => p,
            Err(e) => {
                warn!(error = %e, "upstream failed; serving recommendations only");
                UpstreamPage { results: Vec::new(), annotation: Some(format!("upstream error: {e}")) }
            }
        };
        if let Some(note) = &upstream.annotation {
            self.log.annotate(&format!("{note} (query `{query}`, page {page})"));
        }
        {
            let mut meta = self.metadata.write();
            for r in &upstream.results {
                meta.entry(r.url.clone()).or_insert_with(|| (r.title.clone(), r.snippet.clone()));
            }
        }
        let organic: Vec<DocRef> = upstream.results.iter().take(PAGE_SIZE).map(|r| r.url.clone()).collect();
        let recs = if page == 1 {
            let mut rng = self.rng.lock();
            self.store.recommend(&keys, self.cfg.k, now, &mut *rng)?
        } else {
            Vec::new()
        };
        let mut docs = inject_recommendations(&organic, &recs);
        docs.truncate(PAGE_SIZE);
        let recommended: Vec<bool> = docs.iter().map(|d| recs.contains(d)).collect();

        self.queries.fetch_add(1, Ordering::Relaxed);
        self.log.record(&LogRow {
            user: user.to_string(),
            query: query.to_string(),
            timestamp: now,
            rank: 0,
            url: None,
            recommended: false,
            flavor: self.cfg.flavor,
            page,
        });

        let tokens: Vec<String> = docs.iter().map(|_| self.new_token()).collect();
        let serve_id = self.next_serve.fetch_add(1, Ordering::Relaxed);
        let meta = self.metadata.read();
        let results = docs
            .iter()
            .zip(&tokens)
            .enumerate()
            .map(|(i, (doc, token))| {
                let (title, snippet) = meta.get(doc).cloned().unwrap_or_else(|| (doc.as_str().to_string(), String::new()));
                SerpResult {
                    rank: (page - 1) * PAGE_SIZE as u32 + i as u32 + 1,
                    url: doc.clone(),
                    title,
                    snippet,
                    click_token: token.clone(),
                    recommended: recommended[i],
                }
            })
            .collect();
        drop(meta);

        let mut served = self.served.lock();
        for (i, t) in tokens.iter().enumerate() {
            let nonce = t.split('.').next().unwrap_or_default().to_string();
            served.tokens.insert(nonce, (serve_id, i));
        }
        served.pages.insert(
            serve_id,
            Served {
                user: user.to_string(),
                query: query.to_string(),
                page,
                docs,
                recommended,
                tokens,
                clicked: BTreeSet::new(),
            },
        );
        served.order.push_back(serve_id);
        while served.order.len() > SERVED_CAPACITY {
            if let Some(old) = served.order.pop_front() {
                if let Some(s) = served.pages.remove(&old) {
                    for t in s.tokens {
                        served.tokens.remove(t.split('.').next().unwrap_or_default());
                    }
                }
            }
        }
        Ok(SerpPage { query: query.to_string(), page, results })
    }

    /// Validates and consumes `token`, logs the click and deposits
    /// pheromone. Returns the destination URL.
    pub fn handle_click(&self, token: &str, now: Timestamp) -> Result<DocRef> {
        let reject = |err: ServiceError| {
            self.log.annotate(&format!("rejected click token `{token}`: {err}"));
            err
        };
        let (nonce, sig) = token.split_once('.').ok_or_else(|| reject(ServiceError::BadToken))?;
        if sign(&self.secret, nonce) != sig {
            return Err(reject(ServiceError::BadToken));
        }
        let mut served = self.served.lock();
        let (serve_id, idx) = served.tokens.remove(nonce).ok_or_else(|| reject(ServiceError::UnknownToken))?;
        let s = served.pages.get_mut(&serve_id).ok_or_else(|| reject(ServiceError::UnknownToken))?;
        let local = idx + 1;
        let rank = (s.page - 1) * PAGE_SIZE as u32 + local as u32;
        let doc = s.docs[idx].clone();
        let increment_and_position = match self.cfg.flavor {
            Flavor::Naive => Ok((increment_naive(), None)),
            Flavor::RankingBias => {
                let last = s.clicked.range(..local).next_back().copied().unwrap_or(0);
                let last_rank = if last == 0 { 0 } else { (s.page - 1) * PAGE_SIZE as u32 + last as u32 };
                increment_ranking_bias(rank, last_rank, &self.table).map(|i| (i, None))
            }
            Flavor::Elaborate => Ok((increment_naive(), Some(1 + s.clicked.range(..local).count() as u32))),
        };
        s.clicked.insert(local);
        let row = LogRow {
            user: s.user.clone(),
            query: s.query.clone(),
            timestamp: now,
            rank,
            url: Some(doc.clone()),
            recommended: s.recommended[idx],
            flavor: self.cfg.flavor,
            page: s.page,
        };
        let query = s.query.clone();
        drop(served);

        self.clicks.fetch_add(1, Ordering::Relaxed);
        self.log.record(&row);
        let (increment, position) = increment_and_position?;
        if !doc.is_placeholder() {
            for key in expand_query_keys(&query, self.cfg.key_mode)? {
                self.store.deposit(&key, &doc, position, increment, now)?;
            }
        }
        debug!(%query, rank, url = %doc.as_str(), increment, "click deposited");
        Ok(doc)
    }
}
