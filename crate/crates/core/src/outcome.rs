use serde::{Deserialize, Serialize};

use crate::query::{Interval, Query};

/// Either a bound or the reason no bound was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundResult {
    Bounds(Interval),
    Failure(String),
}

impl BoundResult {
    pub fn interval(&self) -> Option<Interval> {
        match self {
            BoundResult::Bounds(iv) => Some(*iv),
            BoundResult::Failure(_) => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, BoundResult::Failure(_))
    }
}

impl From<crate::Result<Interval>> for BoundResult {
    fn from(r: crate::Result<Interval>) -> Self {
        match r {
            Ok(iv) => BoundResult::Bounds(iv),
            Err(e) => BoundResult::Failure(e.to_string()),
        }
    }
}

/// One algorithm's answer for one query on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundOutcome {
    pub algorithm: String,
    pub query: Query,
    pub result: BoundResult,
    /// Wall-clock seconds.
    pub runtime: f64,
}
