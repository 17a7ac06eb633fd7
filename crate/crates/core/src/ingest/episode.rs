//! Suggestion episodes: one per `suggestion-get`, resolved by what happened to
//! the text inserted after a `suggestion-select`.

use super::event::{EventName, EventSource};
use super::replay::{replay, Origin, Replay};
use super::{IngestError, SessionLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resolution {
    Rejected,
    AcceptedVerbatim,
    AcceptedModified,
}

impl Resolution {
    pub fn as_str(self) -> &'static str {
        match self {
            Resolution::Rejected => "rejected",
            Resolution::AcceptedVerbatim => "accepted-verbatim",
            Resolution::AcceptedModified => "accepted-modified",
        }
    }

    pub fn is_accepted(self) -> bool {
        self != Resolution::Rejected
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuggestionEpisode {
    pub get_event: usize,
    pub shown: Vec<String>,
    pub resolution: Resolution,
    pub accepted_text: Option<String>,
}

pub fn segment_suggestion_episodes(log: &SessionLog) -> Result<Vec<SuggestionEpisode>, IngestError> {
    let replayed = replay(log)?;
    segment_with_replay(log, &replayed)
}

/// Segments episodes using an already computed replay of the same log.
pub fn segment_with_replay(
    log: &SessionLog,
    replayed: &Replay,
) -> Result<Vec<SuggestionEpisode>, IngestError> {
    struct Open {
        get_event: usize,
        shown: Vec<String>,
        insert_event: Option<usize>,
    }

    let mut done: Vec<Open> = Vec::new();
    let mut open: Option<Open> = None;
    let mut awaiting_insert = false;

    for ev in &log.events {
        match ev.name {
            EventName::SuggestionGet => {
                done.extend(open.take());
                open = Some(Open {
                    get_event: ev.index,
                    shown: ev.suggestions.clone().unwrap_or_default(),
                    insert_event: None,
                });
                awaiting_insert = false;
            }
            EventName::SuggestionOpen | EventName::SuggestionReopen => {
                if let (Some(ep), Some(list)) = (open.as_mut(), &ev.suggestions) {
                    if ep.shown.is_empty() {
                        ep.shown = list.clone();
                    }
                }
            }
            EventName::SuggestionSelect => {
                let Some(ep) = open.as_ref() else {
                    return Err(IngestError::LogConsistency {
                        event: ev.index,
                        message: "suggestion-select without a preceding suggestion-get".into(),
                    });
                };
                if ep.insert_event.is_none() {
                    awaiting_insert = true;
                }
            }
            EventName::TextInsert if ev.source == EventSource::Api && awaiting_insert => {
                if let Some(ep) = open.as_mut() {
                    ep.insert_event = Some(ev.index);
                }
                awaiting_insert = false;
            }
            _ => {}
        }
    }
    done.extend(open.take());

    Ok(done
        .into_iter()
        .map(|ep| {
            let accepted = ep
                .insert_event
                .and_then(|idx| replayed.insertions.get(&idx))
                .filter(|ins| !ins.text.is_empty());
            match accepted {
                Some(ins) => SuggestionEpisode {
                    get_event: ep.get_event,
                    shown: ep.shown,
                    resolution: match ins.origin() {
                        Origin::ApiVerbatim => Resolution::AcceptedVerbatim,
                        _ => Resolution::AcceptedModified,
                    },
                    accepted_text: Some(ins.text.clone()),
                },
                None => SuggestionEpisode {
                    get_event: ep.get_event,
                    shown: ep.shown,
                    resolution: Resolution::Rejected,
                    accepted_text: None,
                },
            }
        })
        .collect())
}
