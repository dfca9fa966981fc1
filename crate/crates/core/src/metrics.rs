//! Sweep-level evaluation metrics, the per-simulation best-algorithm rule,
//! and observable features of a dataset.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::info::xlog2x;
use crate::outcome::BoundResult;
use crate::query::{clip_to_ceiling, Interval, Query};

/// Slack allowed when checking whether a bound contains the truth.
pub const VALIDITY_TOL: f64 = 1e-9;

/// Invalid runs whose normalized miss (in percent) is below this are still
/// eligible in [`best_algorithm`].
pub const BEST_DELTA_PERCENT: f64 = 1.0;

/// One algorithm's outcome on one simulation, paired with the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub j: usize,
    pub algorithm: String,
    pub result: BoundResult,
    pub truth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Failed,
    Invalid,
    Valid,
}

/// The bound as scored: clipped to the ceiling, or `None` on failure.
pub fn scored_bound(result: &BoundResult, q: Query) -> Option<Interval> {
    result.interval().map(|b| clip_to_ceiling(b, q).interval)
}

pub fn classify(result: &BoundResult, truth: f64, q: Query) -> Classification {
    match scored_bound(result, q) {
        None => Classification::Failed,
        Some(b) if b.lower - VALIDITY_TOL <= truth && truth <= b.upper + VALIDITY_TOL => {
            Classification::Valid
        }
        Some(_) => Classification::Invalid,
    }
}

/// Distance by which `bound` misses `truth` (0 when it contains it).
pub fn invalid_delta(bound: Interval, truth: f64) -> f64 {
    if truth < bound.lower {
        bound.lower - truth
    } else if truth > bound.upper {
        truth - bound.upper
    } else {
        0.0
    }
}

/// The five metrics for one algorithm. Rates and widths are percentages;
/// `None` marks an empty denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmMetrics {
    pub algorithm: String,
    pub runs: usize,
    pub failed: usize,
    pub invalid: usize,
    pub failure_rate: f64,
    pub invalid_rate: Option<f64>,
    pub bound_width: f64,
    pub net_bound_width: Option<f64>,
    pub invalid_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub query: Query,
    /// Sorted by net bound width ascending, N/A last, then by name.
    pub rows: Vec<AlgorithmMetrics>,
}

impl MetricsReport {
    pub fn get(&self, algorithm: &str) -> Option<&AlgorithmMetrics> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }
}

/// Aggregates the runs of every algorithm into a [`MetricsReport`].
///
/// Each `(j, algorithm)` pair may appear once.
pub fn evaluate(runs: &[RunOutcome], q: Query) -> Result<MetricsReport> {
    let mut by_algo: BTreeMap<&str, Vec<&RunOutcome>> = BTreeMap::new();
    for r in runs {
        by_algo.entry(r.algorithm.as_str()).or_default().push(r);
    }
    let range = q.range();
    let mut rows = Vec::with_capacity(by_algo.len());
    for (algo, list) in by_algo {
        let mut seen = std::collections::BTreeSet::new();
        let (mut failed, mut invalid) = (0usize, 0usize);
        let (mut penalized, mut net, mut delta) = (0.0, 0.0, 0.0);
        for r in &list {
            if !seen.insert(r.j) {
                return Err(Error::InvalidInput(format!(
                    "duplicate run for simulation {} and algorithm {algo}",
                    r.j
                )));
            }
            match (classify(&r.result, r.truth, q), scored_bound(&r.result, q)) {
                (Classification::Valid, Some(b)) => {
                    penalized += b.width();
                    net += b.width();
                }
                (Classification::Invalid, Some(b)) => {
                    invalid += 1;
                    penalized += range;
                    delta += invalid_delta(b, r.truth);
                }
                _ => {
                    failed += 1;
                    penalized += range;
                }
            }
        }
        let n = list.len();
        let returned = n - failed;
        let valid = returned - invalid;
        let pct = |sum: f64, count: usize| (count > 0).then(|| sum / range / count as f64 * 100.0);
        rows.push(AlgorithmMetrics {
            algorithm: algo.to_string(),
            runs: n,
            failed,
            invalid,
            failure_rate: failed as f64 / n as f64 * 100.0,
            invalid_rate: (returned > 0).then(|| invalid as f64 / returned as f64 * 100.0),
            bound_width: penalized / range / n as f64 * 100.0,
            net_bound_width: pct(net, valid),
            invalid_delta: pct(delta, invalid),
        });
    }
    rows.sort_by(|a, b| {
        let key = |m: &AlgorithmMetrics| m.net_bound_width.unwrap_or(f64::INFINITY);
        key(a).total_cmp(&key(b)).then_with(|| a.algorithm.cmp(&b.algorithm))
    });
    Ok(MetricsReport { query: q, rows })
}

/// Narrowest eligible algorithm on one simulation. Eligible: valid, or
/// invalid with a normalized miss below [`BEST_DELTA_PERCENT`]. Ties go to
/// the lexicographically smallest name.
pub fn best_algorithm(per_sim: &[RunOutcome], q: Query) -> Option<String> {
    per_sim
        .iter()
        .filter_map(|r| {
            let b = scored_bound(&r.result, q)?;
            let eligible = match classify(&r.result, r.truth, q) {
                Classification::Valid => true,
                Classification::Invalid => {
                    invalid_delta(b, r.truth) / q.range() * 100.0 < BEST_DELTA_PERCENT
                }
                Classification::Failed => false,
            };
            eligible.then_some((b.width(), r.algorithm.as_str()))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
        .map(|(_, name)| name.to_string())
}

/// Plug-in entropies and mutual informations of the observed columns, in
/// bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Features {
    pub h_x: f64,
    pub h_y: f64,
    pub h_z: Option<f64>,
    pub i_zx: Option<f64>,
    pub i_zy: Option<f64>,
    pub i_xy: f64,
}

fn entropy_of_counts(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    -counts
        .iter()
        .map(|&c| xlog2x(c as f64 / n as f64))
        .sum::<f64>()
}

fn entropy_1(a: &[u8]) -> f64 {
    let mut c = [0usize; 2];
    for &v in a {
        c[v as usize] += 1;
    }
    entropy_of_counts(&c)
}

fn mutual_information(a: &[u8], b: &[u8]) -> f64 {
    let mut c = [0usize; 4];
    for (&u, &v) in a.iter().zip(b) {
        c[2 * u as usize + v as usize] += 1;
    }
    // Clamp rounding noise below zero.
    (entropy_1(a) + entropy_1(b) - entropy_of_counts(&c)).max(0.0)
}

/// Features of a dataset with binary columns.
pub fn features(d: &Dataset) -> Result<Features> {
    if !d.has_binary_outcome() {
        return Err(Error::ContinuousOutcome);
    }
    let y: Vec<u8> = d.y().iter().map(|&v| v as u8).collect();
    let x = d.x();
    Ok(Features {
        h_x: entropy_1(x),
        h_y: entropy_1(&y),
        h_z: d.z().map(entropy_1),
        i_zx: d.z().map(|z| mutual_information(z, x)),
        i_zy: d.z().map(|z| mutual_information(z, &y)),
        i_xy: mutual_information(x, &y),
    })
}
