//! Closed-form bounds (Manski for the ATE, Tian–Pearl for the PNS) and the
//! regression confidence-interval heuristics (OLS, Wald-form 2SLS).
//!
//! The regression intervals are heuristic: a confidence interval on a
//! treatment coefficient is not a causal bound.

use statrs::function::erf::erfc;

use crate::data::{BinaryJoint, Dataset};
use crate::error::{Error, Result};
use crate::query::Interval;

/// Confidence level `1 - α`, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceLevel(f64);

impl ConfidenceLevel {
    pub fn new(level: f64) -> Result<Self> {
        if level > 0.0 && level < 1.0 {
            Ok(ConfidenceLevel(level))
        } else {
            Err(Error::InvalidInput(format!(
                "confidence level {level} outside (0, 1)"
            )))
        }
    }

    pub fn level(self) -> f64 {
        self.0
    }

    /// Two-sided standard-normal critical value `z_{(1+level)/2}`.
    pub fn critical_value(self) -> f64 {
        normal_quantile(0.5 * (1.0 + self.0))
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile by Acklam's rational approximation
/// (relative error below 1.2e-9 on `(0, 1)`).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// Manski's no-assumption ATE bounds. Always of width exactly 1.
pub fn manski_ate(j: &BinaryJoint) -> Interval {
    let contrast = j.p[1][1] - j.p[0][1];
    Interval {
        lower: contrast - j.px(1),
        upper: contrast + j.px(0),
    }
}

/// Tian–Pearl PNS bounds from the observational joint alone.
pub fn tianpearl_pns(j: &BinaryJoint) -> Interval {
    Interval {
        lower: 0.0,
        upper: (j.p[1][1] + j.p[0][0]).min(1.0),
    }
}

fn mean(v: impl Iterator<Item = f64>, n: f64) -> f64 {
    v.sum::<f64>() / n
}

/// OLS of `y` on `x` with intercept; returns `β̂ ± z·SE`.
///
/// SE uses the residual variance with `n - 2` degrees of freedom.
pub fn ols_ate_ci(d: &Dataset, level: ConfidenceLevel) -> Result<Interval> {
    let n = d.n();
    if n < 3 {
        return Err(Error::InvalidInput("OLS needs at least 3 units".into()));
    }
    let nf = n as f64;
    let x: Vec<f64> = d.x().iter().map(|&v| v as f64).collect();
    let y = d.y();
    let mx = mean(x.iter().copied(), nf);
    let my = mean(y.iter().copied(), nf);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::NoTreatmentVariance);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let beta = sxy / sxx;
    let alpha = my - beta * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - alpha - beta * a).powi(2))
        .sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    let half = level.critical_value() * se;
    Ok(Interval {
        lower: beta - half,
        upper: beta + half,
    })
}

/// Two-stage least squares with one binary instrument, in Wald form
/// `β̂ = cov(z, y) / cov(z, x)`; returns `β̂ ± z·SE`.
///
/// SE is the usual IV estimate `σ̂² · S_zz / S_zx²` with `σ̂²` from the
/// structural residuals `y - α̂ - β̂ x` (original `x`) over `n - 2`.
pub fn tsls_ate_ci(d: &Dataset, level: ConfidenceLevel) -> Result<Interval> {
    let z = d.z().ok_or(Error::MissingInstrument)?;
    let n = d.n();
    if n < 3 {
        return Err(Error::InvalidInput("2SLS needs at least 3 units".into()));
    }
    let nf = n as f64;
    let z: Vec<f64> = z.iter().map(|&v| v as f64).collect();
    let x: Vec<f64> = d.x().iter().map(|&v| v as f64).collect();
    let y = d.y();
    let (mz, mx, my) = (
        mean(z.iter().copied(), nf),
        mean(x.iter().copied(), nf),
        mean(y.iter().copied(), nf),
    );
    let szx: f64 = z.iter().zip(&x).map(|(a, b)| (a - mz) * (b - mx)).sum();
    if (szx / nf).abs() < 1e-12 {
        return Err(Error::WeakInstrument);
    }
    let szy: f64 = z.iter().zip(y).map(|(a, b)| (a - mz) * (b - my)).sum();
    let szz: f64 = z.iter().map(|a| (a - mz).powi(2)).sum();
    let beta = szy / szx;
    let alpha = my - beta * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - alpha - beta * a).powi(2))
        .sum();
    let sigma2 = rss / (nf - 2.0);
    let se = (sigma2 * szz / (szx * szx)).sqrt();
    let half = level.critical_value() * se;
    Ok(Interval {
        lower: beta - half,
        upper: beta + half,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::fixtures::example_joint;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Interval, lo: f64, hi: f64, tol: f64) -> bool {
        (a.lower - lo).abs() <= tol && (a.upper - hi).abs() <= tol
    }

    #[test]
    fn quantiles() {
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-8);
        assert!((normal_quantile(0.99) - 2.326347874040841).abs() < 1e-8);
        assert!((normal_quantile(0.995) - 2.575829303548901).abs() < 1e-8);
        assert!((normal_quantile(0.001) + 3.090232306167813).abs() < 1e-8);
        assert_eq!(normal_quantile(0.5), 0.0);
        for p in [0.01, 0.1, 0.3, 0.7, 0.9, 0.99] {
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-9);
        }
        assert!(ConfidenceLevel::new(1.0).is_err());
        assert!(ConfidenceLevel::new(0.0).is_err());
    }

    #[test]
    fn manski_examples() {
        assert!(close(manski_ate(&example_joint()), -0.3, 0.7, 1e-12));
        let all_treated = BinaryJoint::from_cells(0.0, 0.0, 0.0, 1.0).unwrap();
        assert!(close(manski_ate(&all_treated), 0.0, 1.0, 0.0));
        let diag = BinaryJoint::from_cells(0.5, 0.0, 0.0, 0.5).unwrap();
        assert!(close(manski_ate(&diag), 0.0, 1.0, 0.0));
    }

    #[test]
    fn tianpearl_examples() {
        assert!(close(tianpearl_pns(&example_joint()), 0.0, 0.7, 1e-12));
        let anti = BinaryJoint::from_cells(0.0, 0.5, 0.5, 0.0).unwrap();
        assert!(close(tianpearl_pns(&anti), 0.0, 0.0, 0.0));
        let diag = BinaryJoint::from_cells(0.5, 0.0, 0.0, 0.5).unwrap();
        assert!(close(tianpearl_pns(&diag), 0.0, 1.0, 0.0));
    }

    proptest! {
        #[test]
        fn closed_form_invariants(w in proptest::array::uniform4(0.0f64..1.0)) {
            let s: f64 = w.iter().sum::<f64>() + 1e-9;
            let j = BinaryJoint::new([[w[0] / s, w[1] / s], [w[2] / s, 1.0 - (w[0] + w[1] + w[2]) / s]], 0);
            prop_assume!(j.is_ok());
            let j = j.unwrap();
            prop_assert!((manski_ate(&j).width() - 1.0).abs() < 1e-12);
            let tp = tianpearl_pns(&j);
            prop_assert_eq!(tp.lower, 0.0);
            prop_assert!(tp.upper >= 0.0 && tp.upper <= 1.0);
        }
    }

    #[test]
    fn ols_perfect_fit() {
        let x: Vec<u8> = (0..100).map(|i| (i % 3 == 0) as u8).collect();
        let y = x.iter().map(|&v| v as f64).collect();
        let ci = ols_ate_ci(
            &Dataset::new(None, x, y).unwrap(),
            ConfidenceLevel::new(0.95).unwrap(),
        )
        .unwrap();
        assert!(close(ci, 1.0, 1.0, 1e-12));
    }

    #[test]
    fn ols_constant_treatment() {
        let d = Dataset::new(None, vec![1; 10], vec![0.5; 10]).unwrap();
        assert_eq!(
            ols_ate_ci(&d, ConfidenceLevel::new(0.95).unwrap()),
            Err(Error::NoTreatmentVariance)
        );
    }

    #[test]
    fn ols_null_effect_straddles_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<u8> = (0..20_000).map(|_| rng.random_bool(0.5) as u8).collect();
        let y: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let ci = ols_ate_ci(
            &Dataset::new(None, x, y).unwrap(),
            ConfidenceLevel::new(0.99).unwrap(),
        )
        .unwrap();
        assert!(ci.contains(0.0), "{ci}");
    }

    #[test]
    fn ci_widens_with_level_and_shrinks_with_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mk = |n: usize, rng: &mut ChaCha8Rng| {
            let z: Vec<u8> = (0..n).map(|_| rng.random_bool(0.5) as u8).collect();
            let x: Vec<u8> = z
                .iter()
                .map(|&z| (rng.random::<f64>() < 0.2 + 0.6 * z as f64) as u8)
                .collect();
            let y: Vec<f64> = x
                .iter()
                .map(|&x| (0.3 + 0.4 * x as f64 + 0.2 * rng.random::<f64>()).min(1.0))
                .collect();
            Dataset::new(Some(z), x, y).unwrap()
        };
        let small = mk(400, &mut rng);
        let large = mk(40_000, &mut rng);
        let l95 = ConfidenceLevel::new(0.95).unwrap();
        let l99 = ConfidenceLevel::new(0.99).unwrap();
        for f in [ols_ate_ci, tsls_ate_ci] {
            let a = f(&small, l95).unwrap();
            let b = f(&small, l99).unwrap();
            let c = f(&large, l95).unwrap();
            assert!(b.width() > a.width());
            assert!(c.width() < a.width() / 5.0);
        }
    }

    #[test]
    fn tsls_perfect_compliance() {
        let z: Vec<u8> = (0..60).map(|i| (i % 2) as u8).collect();
        let y = z.iter().map(|&v| v as f64).collect();
        let d = Dataset::new(Some(z.clone()), z, y).unwrap();
        let ci = tsls_ate_ci(&d, ConfidenceLevel::new(0.95).unwrap()).unwrap();
        assert!(close(ci, 1.0, 1.0, 1e-12));
    }

    #[test]
    fn tsls_irrelevant_instrument() {
        // z balanced within each x arm: cov(z, x) = 0 exactly.
        let z = vec![0, 1, 0, 1, 0, 1, 0, 1];
        let x = vec![0, 0, 1, 1, 0, 0, 1, 1];
        let y = vec![0.0, 1.0, 1.0, 0.0, 0.5, 0.5, 1.0, 0.0];
        let d = Dataset::new(Some(z), x, y).unwrap();
        assert_eq!(
            tsls_ate_ci(&d, ConfidenceLevel::new(0.95).unwrap()),
            Err(Error::WeakInstrument)
        );
        let d = d.without_instrument();
        assert_eq!(
            tsls_ate_ci(&d, ConfidenceLevel::new(0.95).unwrap()),
            Err(Error::MissingInstrument)
        );
    }
}
