//! Scoring time budgets for the anytime retrieval variants.

use std::time::{Duration, Instant};

/// Wall-clock allowance for the scoring phase. Checked between inverted
/// lists, never inside one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Budget {
    #[default]
    Infinite,
    Limited(Duration),
}

impl Budget {
    pub fn millis(ms: u64) -> Self {
        Budget::Limited(Duration::from_millis(ms))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Budget::Infinite)
    }

    pub(crate) fn start(&self) -> Deadline {
        match *self {
            Budget::Infinite => Deadline(None),
            Budget::Limited(d) => Deadline(Some((Instant::now(), d))),
        }
    }
}

/// A started budget. Reads the monotonic clock only when finite.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Deadline(Option<(Instant, Duration)>);

impl Deadline {
    pub(crate) fn is_infinite(&self) -> bool {
        self.0.is_none()
    }

    pub(crate) fn exhausted(&self) -> bool {
        match self.0 {
            None => false,
            Some((start, allowance)) => start.elapsed() >= allowance,
        }
    }
}
