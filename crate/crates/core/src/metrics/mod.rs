//! Click-based evaluation: condensed lists, (n)DCG and averaging, plus the
//! similarity and correlation measures used to analyse user studies.

mod analytics;
mod average;
mod ndcg;

pub use analytics::{cosine_similarity, pearson_critical_value, pearson_r};
pub use average::{macro_average, micro_average, GroupBy, ScoreRecord};
pub use ndcg::{condensed_list, dcg, ndcg, CondensedList, NdcgConfig};
