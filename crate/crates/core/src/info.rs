//! Scalar information-theoretic helpers. All quantities are in bits.

use crate::error::{Error, Result};

/// Floor applied to probability arguments inside logarithms.
pub const LOG_FLOOR: f64 = 1e-12;

/// `p * log2(p)` with the `0 log 0 = 0` convention.
#[inline]
pub fn xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// Binary entropy `H(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(-xlog2x(p) - xlog2x(1.0 - p))
}

/// Inverts the binary entropy on `[0, 0.5]` by bisection.
///
/// Returns `p` with `|H(p) - h| <= 1e-10`, or `1 - p` when `reflect` is set.
pub fn invert_binary_entropy(h: f64, reflect: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::InvalidInput(format!("entropy {h} outside [0, 1]")));
    }
    if h == 0.0 {
        return Ok(if reflect { 1.0 } else { 0.0 });
    }
    if h == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    // H is strictly increasing on [0, 0.5]; 200 halvings exhaust f64 precision.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let hm = -xlog2x(mid) - xlog2x(1.0 - mid);
        if hm < h {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * 0.25 * hi {
            break;
        }
    }
    let p = 0.5 * (lo + hi);
    Ok(if reflect { 1.0 - p } else { p })
}

/// Plug-in Shannon entropy of a discrete distribution given by counts.
pub fn entropy_from_counts(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -counts.iter().map(|&c| xlog2x(c / total)).sum::<f64>()
}
