//! Upstream result sources the service decorates with recommendations.

mod fixture;
mod index;

use serde::{Deserialize, Serialize};
use swarmsearch_core::pheromone::DocRef;

use crate::error::Result;

pub use fixture::FixtureProvider;
pub use index::{ingest_corpus, tokenize, IngestStats, LocalIndex, INDEX_FILE};

/// Results per upstream page.
pub const PAGE_SIZE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpstreamResult {
    pub url: DocRef,
    pub title: String,
    #[serde(default)]
    pub snippet: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpstreamPage {
    pub results: Vec<UpstreamResult>,
    /// Set when the provider could only answer partially.
    pub annotation: Option<String>,
}

pub trait Provider: Send + Sync {
    /// Results for 1-based `page` of `query`, at most [`PAGE_SIZE`].
    fn search(&self, query: &str, page: u32) -> Result<UpstreamPage>;
}

pub(crate) fn page_slice<T: Clone>(all: &[T], page: u32) -> Vec<T> {
    let start = (page.max(1) as usize - 1) * PAGE_SIZE;
    all.iter().skip(start).take(PAGE_SIZE).cloned().collect()
}
