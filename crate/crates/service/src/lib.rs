//! Live search service: a thin meta-search layer that injects
//! pheromone-recommended results on the first page, logs every interaction
//! in AOL-compatible form, and turns clicks into deposits in real time.

pub mod config;
pub mod engine;
pub mod error;
pub mod http;
pub mod log;
pub mod provider;

pub use config::{ProviderKind, ServiceConfig, ENV_PREFIX};
pub use engine::{SearchEngine, SerpPage, SerpResult, Stats};
pub use error::{Result, ServiceError};
