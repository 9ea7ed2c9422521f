use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;
use swarmsearch_core::pheromone::normalize_query;
use tracing::debug;

use super::{page_slice, Provider, UpstreamPage, UpstreamResult};
use crate::error::{Result, ServiceError};

#[derive(Deserialize)]
struct FixtureFile {
    query: String,
    results: Vec<UpstreamResult>,
}

/// Replays canned result lists: one `*.json` file per query holding
/// `{"query": ..., "results": [{"url", "title", "snippet"}, ...]}`.
#[derive(Debug, Clone, Default)]
pub struct FixtureProvider {
    pages: HashMap<String, Vec<UpstreamResult>>,
}

impl FixtureProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query: &str, results: Vec<UpstreamResult>) {
        self.pages.insert(normalize_query(query), results);
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let mut out = Self::new();
        let entries = std::fs::read_dir(dir).map_err(|e| ServiceError::io(dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| ServiceError::io(dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| ServiceError::io(&path, e))?;
            let file: FixtureFile = serde_json::from_str(&text)
                .map_err(|e| ServiceError::Format { path: path.clone(), message: e.to_string() })?;
            out.insert(&file.query, file.results);
        }
        debug!(queries = out.pages.len(), "fixtures loaded");
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.pages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pages.is_empty()
    }
}

impl Provider for FixtureProvider {
    fn search(&self, query: &str, page: u32) -> Result<UpstreamPage> {
        Ok(match self.pages.get(&normalize_query(query)) {
            Some(all) => UpstreamPage { results: page_slice(all, page), annotation: None },
            None => UpstreamPage { results: Vec::new(), annotation: Some(format!("no fixture for `{query}`")) },
        })
    }
}
