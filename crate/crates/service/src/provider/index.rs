use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use swarmsearch_core::pheromone::DocRef;
use tracing::{info, warn};

use super::{page_slice, Provider, UpstreamPage, UpstreamResult};
use crate::error::{Result, ServiceError};

/// Name of the persisted index, written beside the corpus files.
pub const INDEX_FILE: &str = "index.json";

const SNIPPET_CHARS: usize = 160;

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Deserialize)]
struct CorpusDoc {
    url: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IndexedDoc {
    url: DocRef,
    title: String,
    snippet: String,
}

/// Inverted index ranked by tf·ln(1 + N/df), ties broken by URL.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalIndex {
    docs: Vec<IndexedDoc>,
    /// term -> (doc id, term frequency), doc ids ascending.
    postings: BTreeMap<String, Vec<(u32, u32)>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub files: usize,
    pub docs: usize,
    pub skipped: usize,
}

/// Indexes every `*.jsonl` file in `dir` (one `{url, title, body}` object
/// per line) and writes [`INDEX_FILE`] into `dir`. Malformed lines and
/// repeated URLs are skipped and counted. Re-ingesting an unchanged
/// directory rewrites identical bytes.
pub fn ingest_corpus(dir: &Path) -> Result<(LocalIndex, IngestStats)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| ServiceError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("jsonl"))
        .collect();
    files.sort();
    let mut stats = IngestStats { files: files.len(), ..IngestStats::default() };
    let mut index = LocalIndex::default();
    let mut seen = HashSet::new();
    for path in &files {
        let file = std::fs::File::open(path).map_err(|e| ServiceError::io(path, e))?;
        for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| ServiceError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let doc = match serde_json::from_str::<CorpusDoc>(&line) {
                Ok(d) if !d.url.trim().is_empty() => d,
                _ => {
                    warn!(file = %path.display(), line = n + 1, "skipping malformed document");
                    stats.skipped += 1;
                    continue;
                }
            };
            if !seen.insert(doc.url.clone()) {
                stats.skipped += 1;
                continue;
            }
            index.add(doc);
        }
    }
    stats.docs = index.len();
    let bytes = serde_json::to_vec(&index).map_err(|e| ServiceError::Config(e.to_string()))?;
    let out = dir.join(INDEX_FILE);
    std::fs::write(&out, bytes).map_err(|e| ServiceError::io(&out, e))?;
    info!(docs = stats.docs, skipped = stats.skipped, "corpus ingested");
    Ok((index, stats))
}

impl LocalIndex {
    fn add(&mut self, doc: CorpusDoc) {
        let id = self.docs.len() as u32;
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for t in tokenize(&doc.title).into_iter().chain(tokenize(&doc.body)) {
            *tf.entry(t).or_default() += 1;
        }
        for (term, count) in tf {
            self.postings.entry(term).or_default().push((id, count));
        }
        let snippet: String = doc.body.chars().take(SNIPPET_CHARS).collect();
        let url = DocRef::new(doc.url.trim()).expect("checked non-empty");
        self.docs.push(IndexedDoc { url, title: doc.title, snippet });
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Reads a persisted index, ingesting the directory if none exists.
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(INDEX_FILE);
        match std::fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| ServiceError::Format { path, message: e.to_string() }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(ingest_corpus(dir)?.0),
            Err(e) => Err(ServiceError::io(path, e)),
        }
    }

    /// Every matching document, best first.
    pub fn rank(&self, query: &str) -> Vec<UpstreamResult> {
        let n = self.docs.len() as f64;
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let mut scores: HashMap<u32, f64> = HashMap::new();
        for term in &terms {
            if let Some(post) = self.postings.get(term) {
                let idf = (1.0 + n / post.len() as f64).ln();
                for &(doc, tf) in post {
                    *scores.entry(doc).or_default() += tf as f64 * idf;
                }
            }
        }
        let mut ranked: Vec<(u32, f64)> = scores.into_iter().collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.docs[a.0 as usize].url.cmp(&self.docs[b.0 as usize].url))
        });
        ranked
            .into_iter()
            .map(|(id, _)| {
                let d = &self.docs[id as usize];
                UpstreamResult { url: d.url.clone(), title: d.title.clone(), snippet: d.snippet.clone() }
            })
            .collect()
    }
}

impl Provider for LocalIndex {
    fn search(&self, query: &str, page: u32) -> Result<UpstreamPage> {
        Ok(UpstreamPage { results: page_slice(&self.rank(query), page), annotation: None })
    }
}
