//! Session log ingestion: parsing, document replay and suggestion episodes.

mod episode;
mod event;
mod replay;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

pub use episode::{segment_suggestion_episodes, segment_with_replay, Resolution, SuggestionEpisode};
pub use event::{parse_events, Edit, EventName, EventRecord, EventSource, LoggedSettings, ParsedEvents};
pub use replay::{
    reconstruct_document, replay, ApiInsertion, DocumentState, Origin, Replay, Replayer, Span,
};

/// GPT temperatures used in the data collection.
pub const TEMPERATURES: [f64; 4] = [0.2, 0.3, 0.75, 0.9];
/// GPT frequency penalties used in the data collection.
pub const FREQUENCY_PENALTIES: [f64; 3] = [0.0, 0.5, 1.0];
pub const MAX_TOPICS: usize = 20;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no events")]
    NoEvents,
    #[error("line {line}: timestamp went backwards ({current} ms after {previous} ms)")]
    TimestampRegression { line: usize, previous: u64, current: u64 },
    #[error("replay failed at event {event}: {message}")]
    Replay { event: usize, message: String },
    #[error("inconsistent log at event {event}: {message}")]
    LogConsistency { event: usize, message: String },
    #[error("metadata: {0}")]
    Metadata(String),
    #[error("session {session}: {source}")]
    Session {
        session: String,
        #[source]
        source: Box<IngestError>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        IngestError::Parse { line, message: message.into() }
    }

    fn in_session(self, session: &str) -> Self {
        IngestError::Session { session: session.to_owned(), source: Box::new(self) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Genre {
    Argumentative,
    Creative,
}

impl Genre {
    /// 1 for creative, 0 for argumentative.
    pub fn code(self) -> u8 {
        match self {
            Genre::Creative => 1,
            Genre::Argumentative => 0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "creative" | "1" => Some(Genre::Creative),
            "argumentative" | "0" => Some(Genre::Argumentative),
            _ => None,
        }
    }
}

/// Session-level confounders C1..C5.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionMeta {
    pub genre: Genre,
    pub topic: String,
    pub native: bool,
    pub temperature: f64,
    pub frequency_penalty: f64,
}

impl SessionMeta {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.topic.trim().is_empty() {
            return Err(IngestError::Metadata("empty topic".into()));
        }
        if !TEMPERATURES.iter().any(|t| (t - self.temperature).abs() < 1e-9) {
            return Err(IngestError::Metadata(format!(
                "temperature {} not in {TEMPERATURES:?}",
                self.temperature
            )));
        }
        if !FREQUENCY_PENALTIES.iter().any(|f| (f - self.frequency_penalty).abs() < 1e-9) {
            return Err(IngestError::Metadata(format!(
                "frequency penalty {} not in {FREQUENCY_PENALTIES:?}",
                self.frequency_penalty
            )));
        }
        Ok(())
    }
}

/// One row of the metadata sidecar. Generation settings may be left blank, in
/// which case the values stamped on the log events are used.
#[derive(Debug, Clone, PartialEq)]
pub struct MetadataRow {
    pub session_id: String,
    pub genre: Genre,
    pub topic: String,
    pub native: bool,
    pub temperature: Option<f64>,
    pub frequency_penalty: Option<f64>,
}

impl MetadataRow {
    pub fn resolve(&self, logged: LoggedSettings) -> Result<SessionMeta, IngestError> {
        let missing = |what: &str| {
            IngestError::Metadata(format!("{}: no {what} in metadata or log", self.session_id))
        };
        let meta = SessionMeta {
            genre: self.genre,
            topic: self.topic.clone(),
            native: self.native,
            temperature: self
                .temperature
                .or(logged.temperature)
                .ok_or_else(|| missing("temperature"))?,
            frequency_penalty: self
                .frequency_penalty
                .or(logged.frequency_penalty)
                .ok_or_else(|| missing("frequency penalty"))?,
        };
        meta.validate()?;
        Ok(meta)
    }
}

#[derive(Debug, Clone)]
pub struct SessionLog {
    pub session_id: String,
    pub events: Vec<EventRecord>,
    pub meta: SessionMeta,
    /// Text present before the first edit (the writing prompt).
    pub initial_text: String,
}

pub fn parse_session_log<R: BufRead>(
    session_id: &str,
    raw: R,
    meta: &MetadataRow,
) -> Result<SessionLog, IngestError> {
    let parsed = parse_events(raw)?;
    let meta = meta.resolve(parsed.settings)?;
    Ok(SessionLog {
        session_id: session_id.to_owned(),
        events: parsed.events,
        meta,
        initial_text: parsed.initial_text,
    })
}

/// Reads the metadata sidecar:
/// `session_id,genre,topic,native,temperature,frequency_penalty`.
pub fn read_metadata<R: Read>(reader: R) -> Result<Vec<MetadataRow>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| IngestError::Metadata(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::Metadata(format!("missing column {name}")))
    };
    let (c_id, c_genre, c_topic, c_native, c_temp, c_fp) = (
        col("session_id")?,
        col("genre")?,
        col("topic")?,
        col("native")?,
        col("temperature")?,
        col("frequency_penalty")?,
    );

    let mut rows = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| IngestError::Metadata(e.to_string()))?;
        let line = i + 2;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let bad = |what: &str, v: &str| IngestError::Metadata(format!("line {line}: bad {what} {v:?}"));
        let opt_num = |c: usize, what: &str| -> Result<Option<f64>, IngestError> {
            let v = field(c);
            if v.is_empty() {
                Ok(None)
            } else {
                v.parse::<f64>().map(Some).map_err(|_| bad(what, v))
            }
        };

        let session_id = field(c_id).to_owned();
        if session_id.is_empty() {
            return Err(bad("session_id", ""));
        }
        if !seen.insert(session_id.clone()) {
            return Err(IngestError::Metadata(format!("duplicate session {session_id}")));
        }
        let genre = Genre::parse(field(c_genre)).ok_or_else(|| bad("genre", field(c_genre)))?;
        let native = match field(c_native).to_ascii_lowercase().as_str() {
            "1" | "true" | "native" => true,
            "0" | "false" | "non-native" => false,
            v => return Err(bad("native", v)),
        };
        rows.push(MetadataRow {
            session_id,
            genre,
            topic: field(c_topic).to_owned(),
            native,
            temperature: opt_num(c_temp, "temperature")?,
            frequency_penalty: opt_num(c_fp, "frequency_penalty")?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct Corpus {
    /// Sorted by session id.
    pub sessions: Vec<SessionLog>,
    /// Session files present in the directory but absent from the metadata.
    pub unlisted_files: Vec<String>,
}

/// Loads every session listed in the metadata from `<dir>/<session_id>.jsonl`.
pub fn load_corpus(session_dir: &Path, metadata_path: &Path) -> Result<Corpus, IngestError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| IngestError::Io { path, source }
    };
    let meta_file = File::open(metadata_path).map_err(io_err(metadata_path))?;
    let mut rows = read_metadata(meta_file)?;
    rows.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    let topics: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.topic.as_str()).collect();
    if topics.len() > MAX_TOPICS {
        return Err(IngestError::Metadata(format!(
            "{} distinct topics, at most {MAX_TOPICS} supported",
            topics.len()
        )));
    }

    let listed: BTreeMap<&str, ()> = rows.iter().map(|r| (r.session_id.as_str(), ())).collect();
    let mut unlisted_files = Vec::new();
    for entry in std::fs::read_dir(session_dir).map_err(io_err(session_dir))? {
        let entry = entry.map_err(io_err(session_dir))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            if !listed.contains_key(stem) {
                unlisted_files.push(stem.to_owned());
            }
        }
    }
    unlisted_files.sort();

    let sessions = rows
        .par_iter()
        .map(|row| {
            let path = session_dir.join(format!("{}.jsonl", row.session_id));
            let file = File::open(&path).map_err(io_err(&path))?;
            parse_session_log(&row.session_id, BufReader::new(file), row)
                .map_err(|e| e.in_session(&row.session_id))
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Corpus { sessions, unlisted_files })
}
