//! Query-click logs in the AOL column layout and their query sessions.

mod parse;
mod session;

pub use parse::{
    format_timestamp, parse_log_line, parse_timestamp, read_log, read_log_file, Interaction, LogReadStats,
    AOL_HEADER,
};
pub use session::{
    dedup_consecutive, filter_dataset, partition, read_sessions, restrict_to, sessionize, span_days,
    write_sessions, Click, DatasetSubset, Session, DEFAULT_THRESHOLD, PAGE_SIZE,
};
