use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pheromone::{DocRef, Timestamp};

pub const AOL_HEADER: &str = "AnonID\tQuery\tQueryTime\tItemRank\tClickURL";

const TIME_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

/// One log row: a query issued (rank 0) or a result clicked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub user_id: String,
    pub query: String,
    pub timestamp: Timestamp,
    pub rank: u32,
    pub url: Option<DocRef>,
}

impl Interaction {
    pub fn is_click(&self) -> bool {
        self.rank > 0
    }

    /// The row in AOL column order.
    pub fn to_log_line(&self) -> String {
        let rank = if self.rank == 0 { String::new() } else { self.rank.to_string() };
        let url = self.url.as_ref().map(DocRef::as_str).unwrap_or("");
        format!("{}\t{}\t{}\t{}\t{}", self.user_id, self.query, format_timestamp(self.timestamp), rank, url)
    }
}

/// Parses `YYYY-MM-DD HH:MM:SS`, read as UTC.
pub fn parse_timestamp(text: &str) -> Option<Timestamp> {
    NaiveDateTime::parse_from_str(text.trim(), TIME_FORMAT)
        .ok()
        .map(|t| t.and_utc().timestamp())
}

pub fn format_timestamp(ts: Timestamp) -> String {
    DateTime::from_timestamp(ts, 0)
        .map(|t| t.format(TIME_FORMAT).to_string())
        .unwrap_or_else(|| ts.to_string())
}

/// Parses one tab-separated row: user, query, time, and optionally rank
/// and url. Columns past the fifth are ignored.
///
/// A blank query yields [`Error::SkipRecord`].
pub fn parse_log_line(line: &str, line_no: usize) -> Result<Interaction> {
    let line = line.trim_end_matches(['\r', '\n']);
    let mut fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 3 {
        return Err(Error::parse(line_no, format!("expected at least 3 fields, found {}", fields.len())));
    }
    // Date and time occasionally arrive as two columns.
    let joined;
    if fields.len() >= 4 && fields[3].contains(':') && parse_timestamp(fields[2]).is_none() {
        joined = format!("{} {}", fields[2], fields[3]);
        fields.splice(2..4, [joined.as_str()]);
    }
    let user_id = fields[0].trim();
    if user_id.is_empty() {
        return Err(Error::parse(line_no, "empty user id"));
    }
    let query = fields[1].trim();
    if query.is_empty() || query == "-" {
        return Err(Error::SkipRecord { line: line_no, reason: "blank query" });
    }
    let timestamp = parse_timestamp(fields[2])
        .ok_or_else(|| Error::parse(line_no, format!("malformed timestamp `{}`", fields[2])))?;
    let rank = match fields.get(3).map(|s| s.trim()) {
        None | Some("") => 0,
        Some(r) => r.parse::<u32>().map_err(|_| Error::parse(line_no, format!("non-integer rank `{r}`")))?,
    };
    let url = match fields.get(4).map(|s| s.trim()) {
        None | Some("") => None,
        Some(u) => Some(DocRef::new(u)?),
    };
    match (rank, &url) {
        (0, Some(_)) => return Err(Error::parse(line_no, "url present on a rank-0 row")),
        (r, None) if r > 0 => return Err(Error::parse(line_no, "click without a url")),
        _ => {}
    }
    Ok(Interaction { user_id: user_id.to_string(), query: query.to_string(), timestamp, rank, url })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LogReadStats {
    pub rows: usize,
    pub skipped: usize,
}

/// Reads a whole log. Skips a leading AOL header, blank lines, `#`
/// annotation lines and rows with a blank query; any other malformed row
/// is an error.
pub fn read_log<R: BufRead>(reader: R) -> Result<(Vec<Interaction>, LogReadStats)> {
    let mut out = Vec::new();
    let mut stats = LogReadStats::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if (line_no == 1 && line.starts_with(AOL_HEADER)) || line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_log_line(&line, line_no) {
            Ok(i) => {
                stats.rows += 1;
                out.push(i);
            }
            Err(Error::SkipRecord { .. }) => stats.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((out, stats))
}

/// Opens a plain or gzip-compressed log.
pub fn read_log_file(path: &Path) -> Result<(Vec<Interaction>, LogReadStats)> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic).map_err(|e| Error::io(path, e))?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if n == 2 && magic == [0x1f, 0x8b] {
        read_log(BufReader::new(MultiGzDecoder::new(file)))
    } else {
        read_log(BufReader::new(file))
    }
}
