//! Interaction event logs and the measures derived from them.
//!
//! The log file holds one JSON object per line:
//! `{"t_ms": 1200, "kind": "scope_query", "chrom": "11", "start": 0, "end": 5000000, "payload": null}`.
//! Only `scope_query`, `region_open` and `subsection_open` events count as
//! querying the chromosome; compressions, closes and window moves hide rather
//! than reveal detail.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::span::{union_length, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ScopeQuery,
    RegionOpen,
    RegionClose,
    Compress,
    SubsectionOpen,
    InsetCreate,
    AnswerSubmit,
}

impl EventKind {
    pub fn is_query(self) -> bool {
        matches!(self, EventKind::ScopeQuery | EventKind::RegionOpen | EventKind::SubsectionOpen)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Milliseconds since session start.
    pub t_ms: u64,
    pub kind: EventKind,
    pub chrom: String,
    pub start: u64,
    pub end: u64,
    #[serde(default)]
    pub payload: serde_json::Value,
}

impl Event {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("line {line}: {message}")]
    BadLine { line: usize, message: String },
    #[error("event at index {index} goes back in time ({t_ms} ms after {previous} ms)")]
    NonMonotonicTime { index: usize, t_ms: u64, previous: u64 },
    #[error("event interval [{start}, {end}) is outside a chromosome of length {length}")]
    IntervalOutOfRange { start: u64, end: u64, length: u64 },
    #[error("chromosome length must be positive")]
    EmptyChromosome,
}

/// Time-ordered events.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_events(events: Vec<Event>) -> Result<Self, MetricsError> {
        let mut log = EventLog::new();
        for e in events {
            log.push(e)?;
        }
        Ok(log)
    }

    pub fn push(&mut self, event: Event) -> Result<(), MetricsError> {
        if let Some(last) = self.events.last() {
            if event.t_ms < last.t_ms {
                return Err(MetricsError::NonMonotonicTime {
                    index: self.events.len(),
                    t_ms: event.t_ms,
                    previous: last.t_ms,
                });
            }
        }
        self.events.push(event);
        Ok(())
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events touching chromosome `chrom`.
    pub fn for_chromosome(&self, chrom: &str) -> EventLog {
        EventLog {
            events: self.events.iter().filter(|e| e.chrom == chrom).cloned().collect(),
        }
    }

    pub fn parse_jsonl(text: &str) -> Result<EventLog, MetricsError> {
        let mut log = EventLog::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let event: Event = serde_json::from_str(line).map_err(|e| MetricsError::BadLine {
                line: i + 1,
                message: e.to_string(),
            })?;
            log.push(event).map_err(|e| MetricsError::BadLine {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(log)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }
}

/// Fraction of the chromosome covered by the union of query intervals.
pub fn exploration_percentage(log: &EventLog, chromosome_length: u64) -> Result<f64, MetricsError> {
    if chromosome_length == 0 {
        return Err(MetricsError::EmptyChromosome);
    }
    let mut spans = Vec::new();
    for e in log.events().iter().filter(|e| e.kind.is_query()) {
        if e.start > e.end || e.end > chromosome_length {
            return Err(MetricsError::IntervalOutOfRange {
                start: e.start,
                end: e.end,
                length: chromosome_length,
            });
        }
        spans.push(e.span());
    }
    Ok(union_length(&spans) as f64 / chromosome_length as f64)
}

/// Time of the first query event whose interval contains all of `target`.
pub fn time_to_first_hit(log: &EventLog, target: Span) -> Option<u64> {
    log.events()
        .iter()
        .find(|e| e.kind.is_query() && e.span().covers(&target))
        .map(|e| e.t_ms)
}

/// Time from locating both regions to submitting the answer.
pub fn analysis_time(log: &EventLog, span_a: Span, span_b: Span) -> Option<u64> {
    let located = time_to_first_hit(log, span_a)?.max(time_to_first_hit(log, span_b)?);
    let answered = log.events().iter().find(|e| e.kind == EventKind::AnswerSubmit)?.t_ms;
    if answered < located {
        log::warn!("answer at {answered} ms precedes locating both regions at {located} ms");
        return None;
    }
    Some(answered - located)
}
