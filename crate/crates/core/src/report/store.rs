//! JSON Lines persistence. Every line carries `schema_version`; reading a
//! line with another version fails instead of guessing.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::orchestrator::{GameRecord, ProbeRecord, TranscriptRecord, SCHEMA_VERSION};

pub const GAMES_FILE: &str = "games.jsonl";
pub const TRANSCRIPTS_FILE: &str = "transcripts.jsonl";
pub const PROBES_FILE: &str = "probes.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {source}")]
    Decode {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: schema version {found:?}, this build reads {expected}")]
    Schema { line: usize, found: Option<u64>, expected: u32 },
}

/// Appends one JSON value per line. Each value is serialized first and then
/// written and flushed under the lock, so concurrent callers never
/// interleave within a line.
#[derive(Debug)]
pub struct JsonlSink<W: Write> {
    inner: Mutex<W>,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(inner: W) -> Self {
        JsonlSink { inner: Mutex::new(inner) }
    }

    pub fn append<T: Serialize>(&self, value: &T) -> io::Result<()> {
        let mut line = serde_json::to_vec(value).map_err(io::Error::other)?;
        line.push(b'\n');
        let mut w = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        w.write_all(&line)?;
        w.flush()
    }

    pub fn into_inner(self) -> W {
        self.inner.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

impl JsonlSink<File> {
    /// Opens `path` for appending, creating it if needed.
    pub fn append_to(path: &Path) -> Result<Self, StoreError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| StoreError::Io { path: path.to_path_buf(), source })?;
        Ok(JsonlSink::new(file))
    }
}

/// Game and transcript logs of one output directory.
#[derive(Debug)]
pub struct ExperimentLog {
    games: JsonlSink<File>,
    transcripts: JsonlSink<File>,
}

impl ExperimentLog {
    /// Starts fresh logs in `dir`, replacing earlier ones.
    pub fn create(dir: &Path) -> Result<Self, StoreError> {
        std::fs::create_dir_all(dir).map_err(|source| StoreError::Io { path: dir.to_path_buf(), source })?;
        let fresh = |name: &str| {
            let path = dir.join(name);
            File::create(&path).map(JsonlSink::new).map_err(|source| StoreError::Io { path, source })
        };
        Ok(ExperimentLog { games: fresh(GAMES_FILE)?, transcripts: fresh(TRANSCRIPTS_FILE)? })
    }

    /// Writes the transcript, then the record that points at it.
    pub fn persist_game(&self, record: &GameRecord, transcript: &TranscriptRecord) -> io::Result<()> {
        self.transcripts.append(transcript)?;
        self.games.append(record)
    }
}

/// Decodes JSON Lines, checking each line's schema version. Blank lines are
/// skipped.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>, StoreError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| StoreError::Io { path: PathBuf::from("<input>"), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|source| StoreError::Decode { line: line_no, source })?;
        let found = value.get("schema_version").and_then(serde_json::Value::as_u64);
        if found != Some(u64::from(SCHEMA_VERSION)) {
            return Err(StoreError::Schema { line: line_no, found, expected: SCHEMA_VERSION });
        }
        out.push(serde_json::from_value(value).map_err(|source| StoreError::Decode { line: line_no, source })?);
    }
    Ok(out)
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    let file = File::open(path).map_err(|source| StoreError::Io { path: path.to_path_buf(), source })?;
    read_jsonl(BufReader::new(file)).map_err(|e| match e {
        StoreError::Io { source, .. } => StoreError::Io { path: path.to_path_buf(), source },
        other => other,
    })
}

pub fn read_games(dir: &Path) -> Result<Vec<GameRecord>, StoreError> {
    read_jsonl_file(&dir.join(GAMES_FILE))
}

pub fn read_transcripts(dir: &Path) -> Result<Vec<TranscriptRecord>, StoreError> {
    read_jsonl_file(&dir.join(TRANSCRIPTS_FILE))
}

pub fn read_probes(dir: &Path) -> Result<Vec<ProbeRecord>, StoreError> {
    read_jsonl_file(&dir.join(PROBES_FILE))
}

/// Serializes values as JSON Lines in order.
pub fn to_jsonl<T: Serialize>(values: &[T]) -> String {
    values.iter().map(|v| serde_json::to_string(v).expect("records serialize") + "\n").collect()
}
