//! Event records and the line-delimited session log parser.
//!
//! Each line of a session file is one JSON object in the CoAuthor layout:
//! `eventName`, `eventSource`, `eventTimestamp` (epoch milliseconds), an
//! optional `textDelta` holding Quill-style `ops` (`retain` / `insert` /
//! `delete`), and optional `currentSuggestions`. Other keys are ignored.

use std::io::BufRead;

use serde::Deserialize;
use serde_json::Value;

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventName {
    SystemInit,
    TextInsert,
    TextDelete,
    CursorMove,
    SuggestionGet,
    SuggestionOpen,
    SuggestionSelect,
    SuggestionClose,
    SuggestionReopen,
    SuggestionHover,
    Other,
}

impl EventName {
    pub fn from_raw(raw: &str) -> Self {
        match raw {
            "system-init" | "system-initialize" => EventName::SystemInit,
            "text-insert" => EventName::TextInsert,
            "text-delete" => EventName::TextDelete,
            "cursor-move" | "cursor-forward" | "cursor-backward" | "cursor-select" => {
                EventName::CursorMove
            }
            "suggestion-get" => EventName::SuggestionGet,
            "suggestion-open" => EventName::SuggestionOpen,
            "suggestion-select" => EventName::SuggestionSelect,
            "suggestion-close" => EventName::SuggestionClose,
            "suggestion-reopen" => EventName::SuggestionReopen,
            "suggestion-hover" | "suggestion-up" | "suggestion-down" => EventName::SuggestionHover,
            _ => EventName::Other,
        }
    }

    pub fn is_text_edit(self) -> bool {
        matches!(self, EventName::TextInsert | EventName::TextDelete)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventSource {
    User,
    Api,
}

/// One primitive edit. Offsets are character indices into the document as it
/// stands when this edit is applied; edits of one event apply in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub offset: usize,
    pub inserted: String,
    pub deleted: usize,
}

impl Edit {
    pub fn insert(offset: usize, text: impl Into<String>) -> Self {
        Edit { offset, inserted: text.into(), deleted: 0 }
    }

    pub fn delete(offset: usize, len: usize) -> Self {
        Edit { offset, inserted: String::new(), deleted: len }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub index: usize,
    pub name: EventName,
    /// Event name exactly as logged, kept for events mapped to `Other`.
    pub raw_name: String,
    pub source: EventSource,
    /// Milliseconds since the first event of the session.
    pub timestamp_ms: u64,
    /// Present iff `name` is a text edit.
    pub delta: Option<Vec<Edit>>,
    pub suggestions: Option<Vec<String>>,
}

/// Generation settings that the logger stamps on events, used when the
/// metadata table leaves them blank.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoggedSettings {
    pub temperature: Option<f64>,
    pub frequency_penalty: Option<f64>,
}

/// Result of parsing one session file, before metadata is attached.
#[derive(Debug, Clone)]
pub struct ParsedEvents {
    pub events: Vec<EventRecord>,
    /// Document contents announced by the initialization event (the prompt).
    pub initial_text: String,
    pub settings: LoggedSettings,
}

#[derive(Deserialize)]
struct RawEvent {
    #[serde(rename = "eventName")]
    event_name: String,
    #[serde(rename = "eventSource")]
    event_source: String,
    #[serde(rename = "eventTimestamp")]
    event_timestamp: Value,
    #[serde(rename = "textDelta", default)]
    text_delta: Value,
    #[serde(rename = "currentSuggestions", default)]
    current_suggestions: Value,
    #[serde(rename = "currentDoc", default)]
    current_doc: Option<String>,
    #[serde(rename = "currentTemperature", default)]
    current_temperature: Value,
    #[serde(rename = "currentFrequencyPenalty", default)]
    current_frequency_penalty: Value,
}

pub fn parse_events<R: BufRead>(reader: R) -> Result<ParsedEvents, IngestError> {
    let mut events: Vec<EventRecord> = Vec::new();
    let mut initial_text = String::new();
    let mut settings = LoggedSettings::default();
    let mut first_ts: Option<u64> = None;
    let mut prev_ts = 0u64;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| IngestError::parse(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawEvent =
            serde_json::from_str(&line).map_err(|e| IngestError::parse(line_no, e.to_string()))?;

        let name = EventName::from_raw(&raw.event_name);
        let source = match raw.event_source.as_str() {
            "user" => EventSource::User,
            "api" => EventSource::Api,
            other => {
                return Err(IngestError::parse(line_no, format!("unknown eventSource {other:?}")))
            }
        };
        let absolute = parse_timestamp(&raw.event_timestamp)
            .ok_or_else(|| IngestError::parse(line_no, "eventTimestamp is not a non-negative number"))?;
        let base = *first_ts.get_or_insert(absolute);
        if absolute < base || absolute - base < prev_ts {
            return Err(IngestError::TimestampRegression {
                line: line_no,
                previous: prev_ts,
                current: absolute.saturating_sub(base),
            });
        }
        let timestamp_ms = absolute - base;
        prev_ts = timestamp_ms;

        let delta = if name.is_text_edit() {
            let edits = parse_delta(&raw.text_delta)
                .map_err(|msg| IngestError::parse(line_no, msg))?
                .ok_or_else(|| IngestError::parse(line_no, "text edit event without textDelta"))?;
            Some(edits)
        } else {
            None
        };

        if name == EventName::SystemInit && events.is_empty() {
            if let Some(doc) = raw.current_doc {
                initial_text = doc;
            }
        }
        if settings.temperature.is_none() {
            settings.temperature = loose_number(&raw.current_temperature);
        }
        if settings.frequency_penalty.is_none() {
            settings.frequency_penalty = loose_number(&raw.current_frequency_penalty);
        }

        events.push(EventRecord {
            index: events.len(),
            name,
            raw_name: raw.event_name,
            source,
            timestamp_ms,
            delta,
            suggestions: parse_suggestions(&raw.current_suggestions),
        });
    }

    if events.is_empty() {
        return Err(IngestError::NoEvents);
    }
    Ok(ParsedEvents { events, initial_text, settings })
}

fn parse_timestamp(v: &Value) -> Option<u64> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .or_else(|| n.as_f64().filter(|f| *f >= 0.0 && f.is_finite()).map(|f| f as u64)),
        Value::String(s) => s.trim().parse::<u64>().ok(),
        _ => None,
    }
}

fn loose_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    }
}

/// Converts a Quill delta into sequential edits. `Ok(None)` means the field is
/// absent or blank.
fn parse_delta(v: &Value) -> Result<Option<Vec<Edit>>, String> {
    let ops = match v {
        Value::Null => return Ok(None),
        Value::String(s) if s.is_empty() => return Ok(None),
        Value::Object(map) => match map.get("ops") {
            Some(Value::Array(ops)) => ops,
            _ => return Err("textDelta has no ops array".into()),
        },
        _ => return Err("textDelta is neither an object nor empty".into()),
    };

    let mut edits = Vec::new();
    let mut pos = 0usize;
    for op in ops {
        let obj = op.as_object().ok_or("delta op is not an object")?;
        if let Some(n) = obj.get("retain") {
            pos += n.as_u64().ok_or("retain is not a count")? as usize;
        } else if let Some(text) = obj.get("insert") {
            let text = text.as_str().ok_or("non-text insert is not supported")?;
            let len = text.chars().count();
            edits.push(Edit::insert(pos, text));
            pos += len;
        } else if let Some(n) = obj.get("delete") {
            edits.push(Edit::delete(pos, n.as_u64().ok_or("delete is not a count")? as usize));
        } else {
            return Err("delta op has no retain/insert/delete".into());
        }
    }
    Ok(Some(edits))
}

fn parse_suggestions(v: &Value) -> Option<Vec<String>> {
    let items = v.as_array()?;
    let texts: Vec<String> = items
        .iter()
        .filter_map(|item| match item {
            Value::String(s) => Some(s.clone()),
            Value::Object(map) => map
                .get("original")
                .or_else(|| map.get("trimmed"))
                .and_then(Value::as_str)
                .map(str::to_owned),
            _ => None,
        })
        .collect();
    (!texts.is_empty()).then_some(texts)
}
