//! Swarm-style adaptive result recommendation.
//!
//! Clicks deposit evaporating pheromone on (query, document) trails and
//! documents are recommended in proportion to their trail weight. The crate
//! also carries the offline machinery to evaluate that idea against a
//! query-click log: log parsing and sessionization, intent labelling,
//! condensed-list nDCG, and a Monte Carlo replay of recommendations.

pub mod error;
pub mod experiment;
pub mod intent;
pub mod metrics;
pub mod pheromone;
pub mod querylog;
pub mod sim;

pub use error::{Error, Result};
