//! Offline evaluation by Monte Carlo replay.
//!
//! Trails are trained on one span of a log and frozen. Every test session is
//! then replayed several times: recommendations are drawn, injected at the
//! top of the session's result page, and the clicks the user would
//! allegedly have made on the reordered page are scored against the
//! original clicks.

mod config;
mod inject;
mod monte_carlo;
mod report;
mod synth;
mod train;

pub use config::RunConfig;
pub use inject::{alleged_clicks, inject_recommendations, reconstruct_page};
pub use monte_carlo::{iteration_seed, read_outcomes, run_monte_carlo, write_outcomes, SimOutcome};
pub use report::{session_scores, summarize, Averaging, Dataset, Report, ReportRow, Significance};
pub use synth::{gen_synthetic_log, synthetic_page, SyntheticConfig};
pub use train::{train, TrainStats};
