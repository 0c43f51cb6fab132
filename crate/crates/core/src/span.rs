//! Half-open genomic intervals.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A half-open base-pair interval `[start, end)`, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: u64,
    pub end: u64,
}

impl Span {
    pub const fn new(start: u64, end: u64) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> u64 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    #[inline]
    pub fn contains(&self, pos: u64) -> bool {
        self.start <= pos && pos < self.end
    }

    /// True when `other` lies entirely inside `self`. An empty `other` is
    /// covered only if its start lies within `[start, end]`.
    pub fn covers(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Non-empty overlap test.
    #[inline]
    pub fn intersects(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn intersection(&self, other: &Span) -> Option<Span> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start < end).then_some(Span { start, end })
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Total length of the union of `spans`. Input order does not matter.
pub fn union_length(spans: &[Span]) -> u64 {
    let mut sorted: Vec<Span> = spans.iter().copied().filter(|s| !s.is_empty()).collect();
    sorted.sort_unstable();
    let mut total = 0;
    let mut current: Option<Span> = None;
    for s in sorted {
        match current.as_mut() {
            Some(c) if s.start <= c.end => c.end = c.end.max(s.end),
            Some(c) => {
                total += c.len();
                current = Some(s);
            }
            None => current = Some(s),
        }
    }
    total + current.map_or(0, |c| c.len())
}
