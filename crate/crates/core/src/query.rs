//! Causal queries, bound intervals and the trivial-ceiling clipping rule.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two causal targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Query {
    /// `P(Y_1 = 1) - P(Y_0 = 1)`.
    #[serde(rename = "ATE")]
    Ate,
    /// `P(Y_1 = 1, Y_0 = 0)`.
    #[serde(rename = "PNS")]
    Pns,
}

impl Query {
    pub fn trivial_lower(self) -> f64 {
        match self {
            Query::Ate => -1.0,
            Query::Pns => 0.0,
        }
    }

    pub fn trivial_upper(self) -> f64 {
        1.0
    }

    pub fn trivial(self) -> Interval {
        Interval {
            lower: self.trivial_lower(),
            upper: self.trivial_upper(),
        }
    }

    /// Normalization constant: width of the logically possible range.
    pub fn range(self) -> f64 {
        self.trivial_upper() - self.trivial_lower()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Query::Ate => "ATE",
            Query::Pns => "PNS",
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Query {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ATE" | "ate" => Ok(Query::Ate),
            "PNS" | "pns" => Ok(Query::Pns),
            other => Err(Error::InvalidInput(format!("unknown query `{other}`"))),
        }
    }
}

/// A closed interval `[lower, upper]` on a causal query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::InvalidInput(format!(
                "interval [{lower}, {upper}] is empty or NaN"
            )));
        }
        Ok(Interval { lower, upper })
    }

    /// Builds an interval, swapping endpoints that are out of order by at
    /// most `slack` (solver round-off). Larger inversions are errors.
    pub(crate) fn from_endpoints(lower: f64, upper: f64, slack: f64) -> Result<Self> {
        if lower > upper && lower - upper <= slack {
            let mid = 0.5 * (lower + upper);
            return Interval::new(mid, mid);
        }
        Interval::new(lower, upper)
    }

    pub fn point(v: f64) -> Self {
        Interval { lower: v, upper: v }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// `self ⊆ other` with `tol` slack on both ends.
    pub fn is_within(&self, other: &Interval, tol: f64) -> bool {
        self.lower >= other.lower - tol && self.upper <= other.upper + tol
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6}, {:.6}]", self.lower, self.upper)
    }
}

/// Result of [`clip_to_ceiling`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clipped {
    pub interval: Interval,
    /// The input lay entirely outside the ceiling and was replaced by it.
    pub degenerate: bool,
}

/// Clips a bound to the trivial ceiling of `query`.
///
/// A bound lying entirely outside the ceiling becomes the full trivial
/// interval and is flagged as degenerate.
pub fn clip_to_ceiling(b: Interval, query: Query) -> Clipped {
    let lower = b.lower.max(query.trivial_lower());
    let upper = b.upper.min(query.trivial_upper());
    if lower > upper {
        Clipped {
            interval: query.trivial(),
            degenerate: true,
        }
    } else {
        Clipped {
            interval: Interval { lower, upper },
            degenerate: false,
        }
    }
}
