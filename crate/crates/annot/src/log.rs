//! Append-only JSON-lines ratings log.
//!
//! Each line is a rating record plus optional client metadata. A line is
//! acknowledged only after `write_all` and `sync_data` both succeed.
//! Recovery never truncates: a torn final line is terminated with `\n` so
//! later appends start on a fresh line, and any line that does not parse is
//! skipped and counted.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use voqual_core::RatingRecord;

use crate::error::{AnnotError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    #[serde(flatten)]
    pub record: RatingRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_duration_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_timestamp: Option<DateTime<Utc>>,
}

impl LogEntry {
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("log entry serializes");
        s.push('\n');
        s
    }
}

/// What reading an existing log found.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Recovered {
    pub entries: Vec<LogEntry>,
    /// 1-based line numbers that failed to parse.
    pub skipped_lines: Vec<usize>,
    /// The file did not end with a newline.
    pub torn_tail: bool,
}

/// Parses log text. Blank lines are ignored.
pub fn parse_log(text: &str) -> Recovered {
    let mut out = Recovered {
        torn_tail: !text.is_empty() && !text.ends_with('\n'),
        ..Default::default()
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<LogEntry>(line) {
            Ok(e) => out.entries.push(e),
            Err(err) => {
                log::warn!("ratings log line {}: skipped: {err}", i + 1);
                out.skipped_lines.push(i + 1);
            }
        }
    }
    out
}

pub fn read_log(path: &Path) -> Result<Recovered> {
    match std::fs::read(path) {
        Ok(bytes) => Ok(parse_log(&String::from_utf8_lossy(&bytes))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Recovered::default()),
        Err(e) => Err(AnnotError::io(path, e)),
    }
}

#[derive(Debug)]
pub struct RatingLog {
    path: PathBuf,
    file: File,
    /// A previous append failed and may have left a partial line.
    dirty: bool,
}

impl RatingLog {
    /// Opens (creating if absent) and recovers the log.
    pub fn open(path: &Path) -> Result<(Self, Recovered)> {
        let io = |e| AnnotError::io(path, e);
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io)?;
        let mut bytes = Vec::new();
        file.seek(SeekFrom::Start(0)).map_err(io)?;
        file.read_to_end(&mut bytes).map_err(io)?;
        let recovered = parse_log(&String::from_utf8_lossy(&bytes));
        if recovered.torn_tail {
            log::warn!("ratings log {} ends mid-line; terminating it", path.display());
            file.write_all(b"\n").map_err(io)?;
            file.sync_data().map_err(io)?;
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
                dirty: false,
            },
            recovered,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends one line and syncs it to disk. After a failed append the
    /// next one starts with a newline so a partial line stays isolated.
    pub fn append(&mut self, entry: &LogEntry) -> Result<()> {
        let mut line = entry.to_line();
        if self.dirty {
            line.insert(0, '\n');
        }
        self.dirty = true;
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(|e| AnnotError::io(&self.path, e))?;
        self.dirty = false;
        Ok(())
    }
}
