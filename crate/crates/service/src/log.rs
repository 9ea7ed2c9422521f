use std::fs::OpenOptions;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::mpsc;
use std::thread::JoinHandle;

use swarmsearch_core::pheromone::{DocRef, Flavor, Timestamp};
use swarmsearch_core::querylog::format_timestamp;
use tracing::error;

use crate::error::{Result, ServiceError};

/// AOL columns followed by the service's extension columns.
pub const LOG_HEADER: &str = "AnonID\tQuery\tQueryTime\tItemRank\tClickURL\tRecommended\tFlavor\tPage";

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub user: String,
    pub query: String,
    pub timestamp: Timestamp,
    /// 0 for a query, otherwise the clicked rank.
    pub rank: u32,
    pub url: Option<DocRef>,
    pub recommended: bool,
    pub flavor: Flavor,
    pub page: u32,
}

fn clean(field: &str) -> String {
    field.replace(['\t', '\n', '\r'], " ")
}

impl LogRow {
    pub fn to_line(&self) -> String {
        let rank = if self.rank == 0 { String::new() } else { self.rank.to_string() };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            clean(&self.user),
            clean(&self.query),
            format_timestamp(self.timestamp),
            rank,
            self.url.as_ref().map(|u| clean(u.as_str())).unwrap_or_default(),
            u8::from(self.recommended),
            self.flavor,
            self.page
        )
    }
}

enum Msg {
    Line(String),
    Flush(mpsc::SyncSender<()>),
}

/// Append-only log with a single writer thread; callers never wait on
/// disk except through [`InteractionLog::flush`].
pub struct InteractionLog {
    tx: Option<mpsc::Sender<Msg>>,
    worker: Option<JoinHandle<()>>,
}

impl InteractionLog {
    pub fn new<W: Write + Send + 'static>(writer: W) -> Self {
        let (tx, rx) = mpsc::channel::<Msg>();
        let worker = std::thread::Builder::new()
            .name("interaction-log".into())
            .spawn(move || {
                let mut out = BufWriter::new(writer);
                for msg in rx {
                    let res = match msg {
                        Msg::Line(l) => writeln!(out, "{l}"),
                        Msg::Flush(ack) => {
                            let r = out.flush();
                            let _ = ack.send(());
                            r
                        }
                    };
                    if let Err(e) = res {
                        error!(error = %e, "interaction log write failed");
                    }
                }
                let _ = out.flush();
            })
            .expect("spawn log writer");
        Self { tx: Some(tx), worker: Some(worker) }
    }

    /// Appends to `path`, writing the header when the file is new.
    pub fn open(path: &Path) -> Result<Self> {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| ServiceError::io(path, e))?;
        if fresh {
            writeln!(file, "{LOG_HEADER}").map_err(|e| ServiceError::io(path, e))?;
        }
        Ok(Self::new(file))
    }

    pub fn disabled() -> Self {
        Self::new(std::io::sink())
    }

    fn send(&self, msg: Msg) {
        if let Some(tx) = &self.tx {
            let _ = tx.send(msg);
        }
    }

    pub fn record(&self, row: &LogRow) {
        self.send(Msg::Line(row.to_line()));
    }

    /// A `#` comment line, skipped by log readers.
    pub fn annotate(&self, note: &str) {
        self.send(Msg::Line(format!("# {}", clean(note))));
    }

    /// Blocks until everything sent so far is written out.
    pub fn flush(&self) {
        let (ack, done) = mpsc::sync_channel(1);
        self.send(Msg::Flush(ack));
        let _ = done.recv();
    }
}

impl Drop for InteractionLog {
    fn drop(&mut self) {
        drop(self.tx.take());
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}
