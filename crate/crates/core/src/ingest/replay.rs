//! Sequential replay of text deltas with per-character provenance.
//!
//! The document is kept as a run-length list of pieces whose lengths always
//! sum to the document length, so the tiling of `[0, len)` holds after every
//! edit. Each api insertion gets its own identity (the index of the event that
//! inserted it); the fate of that insertion is tracked separately so it
//! survives splitting and full deletion.

use std::collections::BTreeMap;

use super::event::{Edit, EventRecord, EventSource};
use super::{IngestError, SessionLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Human,
    ApiVerbatim,
    ApiModified,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Human => "human",
            Origin::ApiVerbatim => "api-verbatim",
            Origin::ApiModified => "api-modified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub origin: Origin,
    /// Event index of the api insertion this span came from.
    pub source_event: Option<usize>,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentState {
    pub text: String,
    pub spans: Vec<Span>,
}

impl DocumentState {
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    /// Spans are sorted, disjoint, non-empty and cover `[0, char_len)`.
    pub fn tiling_holds(&self) -> bool {
        let mut cursor = 0;
        for s in &self.spans {
            if s.start != cursor || s.end <= s.start {
                return false;
            }
            cursor = s.end;
        }
        cursor == self.char_len()
    }
}

/// What happened to one api insertion over the rest of the session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiInsertion {
    pub text: String,
    pub remaining: usize,
    pub modified: bool,
}

impl ApiInsertion {
    pub fn origin(&self) -> Origin {
        if self.modified || self.remaining == 0 {
            Origin::ApiModified
        } else {
            Origin::ApiVerbatim
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Provenance {
    Human,
    Api(usize),
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    len: usize,
    prov: Provenance,
}

#[derive(Debug, Clone, Default)]
pub struct Replayer {
    text: Vec<char>,
    pieces: Vec<Piece>,
    insertions: BTreeMap<usize, ApiInsertion>,
}

impl Replayer {
    pub fn new(initial_text: &str) -> Self {
        let text: Vec<char> = initial_text.chars().collect();
        let pieces = if text.is_empty() {
            Vec::new()
        } else {
            vec![Piece { len: text.len(), prov: Provenance::Human }]
        };
        Replayer { text, pieces, insertions: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    pub fn apply_event(&mut self, event: &EventRecord) -> Result<(), IngestError> {
        let Some(edits) = &event.delta else { return Ok(()) };
        for edit in edits {
            self.apply_edit(edit, event.source, event.index)?;
        }
        Ok(())
    }

    pub fn apply_edit(
        &mut self,
        edit: &Edit,
        source: EventSource,
        event_index: usize,
    ) -> Result<(), IngestError> {
        if edit.deleted > 0 {
            self.delete(edit.offset, edit.deleted, source, event_index)?;
        }
        if !edit.inserted.is_empty() {
            self.insert(edit.offset, &edit.inserted, source, event_index)?;
        }
        Ok(())
    }

    fn insert(
        &mut self,
        offset: usize,
        inserted: &str,
        source: EventSource,
        event_index: usize,
    ) -> Result<(), IngestError> {
        if offset > self.text.len() {
            return Err(IngestError::Replay {
                event: event_index,
                message: format!("insert offset {offset} beyond document length {}", self.text.len()),
            });
        }
        let chars: Vec<char> = inserted.chars().collect();
        let len = chars.len();
        self.text.splice(offset..offset, chars);

        let prov = match source {
            EventSource::User => Provenance::Human,
            EventSource::Api => {
                let entry = self.insertions.entry(event_index).or_insert_with(|| ApiInsertion {
                    text: String::new(),
                    remaining: 0,
                    modified: false,
                });
                entry.text.push_str(inserted);
                entry.remaining += len;
                Provenance::Api(event_index)
            }
        };

        // Locate the piece boundary at or around `offset`.
        let mut cursor = 0;
        let mut idx = 0;
        while idx < self.pieces.len() && cursor + self.pieces[idx].len <= offset {
            cursor += self.pieces[idx].len;
            idx += 1;
        }
        let inner = offset - cursor;

        if idx < self.pieces.len() && inner > 0 {
            // Strictly inside piece `idx`.
            let host = self.pieces[idx];
            if host.prov == prov {
                self.pieces[idx].len += len;
                return Ok(());
            }
            if let (Provenance::Api(id), EventSource::User) = (host.prov, source) {
                if let Some(ins) = self.insertions.get_mut(&id) {
                    ins.modified = true;
                }
            }
            let left = Piece { len: inner, prov: host.prov };
            let right = Piece { len: host.len - inner, prov: host.prov };
            self.pieces.splice(idx..=idx, [left, Piece { len, prov }, right]);
            return Ok(());
        }

        // On a boundary: between piece idx-1 and idx.
        if prov == Provenance::Human {
            if idx > 0 && self.pieces[idx - 1].prov == Provenance::Human {
                self.pieces[idx - 1].len += len;
                return Ok(());
            }
            if idx < self.pieces.len() && self.pieces[idx].prov == Provenance::Human {
                self.pieces[idx].len += len;
                return Ok(());
            }
        }
        self.pieces.insert(idx, Piece { len, prov });
        Ok(())
    }

    fn delete(
        &mut self,
        offset: usize,
        count: usize,
        source: EventSource,
        event_index: usize,
    ) -> Result<(), IngestError> {
        let end = offset.checked_add(count).filter(|e| *e <= self.text.len()).ok_or_else(|| {
            IngestError::Replay {
                event: event_index,
                message: format!(
                    "delete of {count} at offset {offset} beyond document length {}",
                    self.text.len()
                ),
            }
        })?;
        self.text.drain(offset..end);

        let mut cursor = 0;
        for piece in self.pieces.iter_mut() {
            let start = cursor;
            let stop = cursor + piece.len;
            cursor = stop;
            let overlap = stop.min(end).saturating_sub(start.max(offset));
            if overlap == 0 {
                continue;
            }
            piece.len -= overlap;
            if let Provenance::Api(id) = piece.prov {
                if let Some(ins) = self.insertions.get_mut(&id) {
                    ins.remaining -= overlap;
                    if source == EventSource::User || ins.remaining == 0 {
                        ins.modified = true;
                    }
                }
            }
        }
        self.pieces.retain(|p| p.len > 0);
        self.pieces.dedup_by(|next, prev| {
            if next.prov == Provenance::Human && prev.prov == Provenance::Human {
                prev.len += next.len;
                true
            } else {
                false
            }
        });
        Ok(())
    }

    pub fn insertions(&self) -> &BTreeMap<usize, ApiInsertion> {
        &self.insertions
    }

    pub fn state(&self) -> DocumentState {
        let mut spans = Vec::with_capacity(self.pieces.len());
        let mut cursor = 0;
        for piece in &self.pieces {
            let (origin, source_event) = match piece.prov {
                Provenance::Human => (Origin::Human, None),
                Provenance::Api(id) => (self.insertions[&id].origin(), Some(id)),
            };
            spans.push(Span { start: cursor, end: cursor + piece.len, origin, source_event });
            cursor += piece.len;
        }
        DocumentState { text: self.text.iter().collect(), spans }
    }
}

/// Full replay output: the final document plus the fate of every api insertion.
#[derive(Debug, Clone)]
pub struct Replay {
    pub document: DocumentState,
    pub insertions: BTreeMap<usize, ApiInsertion>,
}

pub fn replay(log: &SessionLog) -> Result<Replay, IngestError> {
    let mut replayer = Replayer::new(&log.initial_text);
    for event in &log.events {
        replayer.apply_event(event)?;
    }
    let document = replayer.state();
    Ok(Replay { document, insertions: replayer.insertions })
}

pub fn reconstruct_document(log: &SessionLog) -> Result<DocumentState, IngestError> {
    replay(log).map(|r| r.document)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user(r: &mut Replayer, edit: Edit, idx: usize) {
        r.apply_edit(&edit, EventSource::User, idx).unwrap();
    }

    fn api(r: &mut Replayer, edit: Edit, idx: usize) {
        r.apply_edit(&edit, EventSource::Api, idx).unwrap();
    }

    #[test]
    fn user_typing_is_one_human_span() {
        let mut r = Replayer::new("");
        user(&mut r, Edit::insert(0, "abc"), 1);
        let s = r.state();
        assert_eq!(s.text, "abc");
        assert_eq!(s.spans, vec![Span { start: 0, end: 3, origin: Origin::Human, source_event: None }]);
    }

    #[test]
    fn delete_inside_api_span_marks_it_modified() {
        let mut r = Replayer::new("");
        api(&mut r, Edit::insert(0, "cat"), 1);
        user(&mut r, Edit::delete(1, 1), 2);
        let s = r.state();
        assert_eq!(s.text, "ct");
        assert_eq!(s.spans.len(), 1);
        assert_eq!(s.spans[0].origin, Origin::ApiModified);
    }

    #[test]
    fn appending_after_api_span_does_not_modify_it() {
        let mut r = Replayer::new("");
        api(&mut r, Edit::insert(0, "dog"), 1);
        user(&mut r, Edit::insert(3, " runs"), 2);
        let s = r.state();
        assert_eq!(s.text, "dog runs");
        assert_eq!(s.spans[0].origin, Origin::ApiVerbatim);
        assert_eq!(s.spans[1].origin, Origin::Human);
        assert!(s.tiling_holds());
    }

    #[test]
    fn typing_inside_api_span_splits_and_modifies() {
        let mut r = Replayer::new("");
        api(&mut r, Edit::insert(0, "abcd"), 1);
        user(&mut r, Edit::insert(2, "X"), 2);
        let s = r.state();
        assert_eq!(s.text, "abXcd");
        let origins: Vec<_> = s.spans.iter().map(|s| s.origin).collect();
        assert_eq!(origins, vec![Origin::ApiModified, Origin::Human, Origin::ApiModified]);
        assert!(s.tiling_holds());
    }

    #[test]
    fn api_insert_inside_api_span_is_not_a_modification() {
        let mut r = Replayer::new("");
        api(&mut r, Edit::insert(0, "abcd"), 1);
        api(&mut r, Edit::insert(2, "ZZ"), 2);
        let s = r.state();
        assert!(s.spans.iter().all(|s| s.origin == Origin::ApiVerbatim));
        assert_eq!(s.spans.len(), 3);
    }

    #[test]
    fn fully_deleted_insertion_counts_as_modified() {
        let mut r = Replayer::new("x ");
        api(&mut r, Edit::insert(2, "abc"), 1);
        user(&mut r, Edit::delete(2, 3), 2);
        assert_eq!(r.state().text, "x ");
        assert_eq!(r.insertions()[&1].origin(), Origin::ApiModified);
        assert_eq!(r.state().spans.len(), 1);
    }

    #[test]
    fn out_of_bounds_edit_names_the_event() {
        let mut r = Replayer::new("ab");
        let err = r.apply_edit(&Edit::delete(1, 5), EventSource::User, 7).unwrap_err();
        assert!(matches!(err, IngestError::Replay { event: 7, .. }));
        let err = r.apply_edit(&Edit::insert(3, "x"), EventSource::User, 8).unwrap_err();
        assert!(matches!(err, IngestError::Replay { event: 8, .. }));
    }

    #[test]
    fn human_pieces_merge_after_deleting_api_text_between_them() {
        let mut r = Replayer::new("ab");
        api(&mut r, Edit::insert(1, "XY"), 1);
        user(&mut r, Edit::delete(1, 2), 2);
        let s = r.state();
        assert_eq!(s.text, "ab");
        assert_eq!(s.spans.len(), 1);
    }
}
