use std::path::PathBuf;

use crate::pheromone::{Flavor, Timestamp};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("clock skew: asked for time {now} but the entry was last touched at {last_touch}")]
    ClockSkew { last_touch: Timestamp, now: Timestamp },

    #[error("deposit increment must be positive and finite, got {0}")]
    InvalidIncrement(f64),

    #[error("{flavor} trails {}", if *.has_position { "must not carry a position" } else { "require a position" })]
    FlavorKey { flavor: Flavor, has_position: bool },

    #[error("examination table has no entry for position {position} after a click at {last_clicked}")]
    MissingExamination { position: u32, last_clicked: u32 },

    #[error("no clicks: no preference can be derived")]
    NoPreference,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid query: blank after normalization")]
    InvalidQuery,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: record skipped ({reason})")]
    SkipRecord { line: usize, reason: &'static str },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error("session has no judged documents")]
    EmptyJudgments,

    #[error("cutoff must be at least 1, got {0}")]
    InvalidCutoff(usize),

    #[error("all gains are zero: nDCG is undefined")]
    UndefinedNormalization,

    #[error("no data: {0}")]
    NoData(String),

    #[error("cosine similarity undefined for an empty term vector")]
    UndefinedSimilarity,

    #[error("Pearson correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("sessions are not in chronological order at index {0}")]
    Unordered(usize),

    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
