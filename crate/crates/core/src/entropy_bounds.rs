//! Entropy-constrained bounds under weak confounding.
//!
//! A cap `θ` on the confounder entropy `H(U)` bounds the mutual information
//! between `X` and the potential outcomes. Both programs here are linear
//! except for that one convex MI constraint, handled by
//! [`solve_convex_cut`]. All information quantities are in bits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::BinaryJoint;
use crate::error::{Error, Result};
use crate::info::{binary_entropy, LOG_FLOOR};
use crate::query::{clip_to_ceiling, Interval, Query};
use crate::solver::{
    solve_convex_cut, solve_lp, ConvexConstraint, LinearProgram, LpSolution, LpStatus, Sense,
    DEFAULT_CUT_TOL, DEFAULT_MAX_CUTS,
};

/// How a `θ` value was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaSource {
    Fixed,
    TrueTheta,
    RandomTheta,
    UnderspecifyTheta,
}

/// Entropy cap in bits, tagged with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub value: f64,
    pub source: ThetaSource,
}

impl Theta {
    pub fn fixed(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidInput(format!("theta {value} must be >= 0")));
        }
        Ok(Theta {
            value,
            source: ThetaSource::Fixed,
        })
    }

    /// `θ = H(p_u)` for a binary confounder with `P(U = 1) = p_u`.
    pub fn true_theta(p_u: f64) -> Result<Self> {
        Ok(Theta {
            value: binary_entropy(p_u)?,
            source: ThetaSource::TrueTheta,
        })
    }

    /// `θ ~ Uni(0, 1)`, independent of the confounder.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Theta {
            value: rng.random::<f64>(),
            source: ThetaSource::RandomTheta,
        }
    }

    /// `θ ~ Uni(0, h_u)`: a cap that is never above the true entropy.
    pub fn underspecify<R: Rng + ?Sized>(h_u: f64, rng: &mut R) -> Self {
        Theta {
            value: rng.random::<f64>() * h_u.max(0.0),
            source: ThetaSource::UnderspecifyTheta,
        }
    }

    /// `H(U) − θ`, positive when the cap is too low.
    pub fn error(&self, h_u: f64) -> f64 {
        h_u - self.value
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_nan() || theta < 0.0 {
        Err(Error::InvalidInput(format!("theta {theta} must be >= 0")))
    } else {
        Ok(())
    }
}

/// `a · log2(a / b)` with both arguments floored inside the logarithm and
/// `0 · log 0 = 0`.
fn kl_term(a: f64, b: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else {
        a * (a.max(LOG_FLOOR) / b.max(LOG_FLOOR)).log2()
    }
}

fn optimum(sol: LpSolution) -> Result<f64> {
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        LpStatus::Infeasible => Err(Error::Infeasible),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

fn solve_both(lp: &LinearProgram, cc: Option<&ConvexConstraint<'_>>) -> Result<(f64, f64)> {
    let run = |sense| match cc {
        Some(cc) => solve_convex_cut(lp, cc, sense, DEFAULT_CUT_TOL, DEFAULT_MAX_CUTS),
        None => solve_lp(lp, sense),
    };
    Ok((optimum(run(Sense::Min)?)?, optimum(run(Sense::Max)?)?))
}

/// Index of `b_{ij} = P(Y_{x_q} = i | X = j)` in the arm program.
fn b(i: usize, j: usize) -> usize {
    2 * i + j
}

/// `I(X; Y_{x_q})` in bits for the channel `b` and treatment marginal `px`.
pub fn arm_mutual_information(bv: &[f64], px: [f64; 2]) -> f64 {
    let mut total = 0.0;
    for i in 0..2 {
        let marginal: f64 = (0..2).map(|k| bv[b(i, k)] * px[k]).sum();
        for j in 0..2 {
            total += px[j] * kl_term(bv[b(i, j)], marginal);
        }
    }
    total
}

/// Gradient of [`arm_mutual_information`]: `∂I/∂b_ij = P(x_j) log2(b_ij / m_i)`.
fn arm_mutual_information_gradient(bv: &[f64], px: [f64; 2]) -> Vec<f64> {
    let mut g = vec![0.0; 4];
    for i in 0..2 {
        let marginal: f64 = (0..2).map(|k| bv[b(i, k)] * px[k]).sum();
        for j in 0..2 {
            g[b(i, j)] = px[j] * log2_ratio(bv[b(i, j)], marginal);
        }
    }
    g
}

fn log2_ratio(a: f64, b: f64) -> f64 {
    (a.max(LOG_FLOOR) / b.max(LOG_FLOOR)).log2()
}

/// Bounds on `P(Y = 1 | do(X = arm))` under `I(X; Y_arm) ≤ θ`.
pub fn entropy_do_bound(j: &BinaryJoint, arm: usize, theta: f64) -> Result<Interval> {
    check_theta(theta)?;
    let px = [j.px(0), j.px(1)];
    let cond = j
        .p_y1_given(arm)
        .ok_or(Error::EmptyTreatmentArm(arm as u8))?;
    let observed = [1.0 - cond, cond];
    let other = 1 - arm;

    let mut lp = LinearProgram::new(4);
    for v in 0..4 {
        lp.set_bounds(v, 0.0, 1.0);
    }
    let mut total = vec![0.0; 4];
    for i in 0..2 {
        for jj in 0..2 {
            total[b(i, jj)] = px[jj];
        }
        let mut row = vec![0.0; 4];
        row[b(i, arm)] = 1.0;
        lp.add_eq(row, observed[i]);
    }
    lp.add_eq(total, 1.0);
    for jj in 0..2 {
        let mut col = vec![0.0; 4];
        col[b(0, jj)] = 1.0;
        col[b(1, jj)] = 1.0;
        lp.add_eq(col, 1.0);
    }
    let mut objective = vec![0.0; 4];
    for jj in 0..2 {
        objective[b(1, jj)] = px[jj];
    }
    let mut lp = lp.with_objective(objective);

    let (lo, hi) = if theta <= 0.0 {
        // Zero information: every column equals the observed one.
        for i in 0..2 {
            let mut row = vec![0.0; 4];
            row[b(i, other)] = 1.0;
            row[b(i, arm)] = -1.0;
            lp.add_eq(row, 0.0);
        }
        solve_both(&lp, None)?
    } else {
        let mut anchor = vec![0.0; 4];
        for i in 0..2 {
            anchor[b(i, 0)] = observed[i];
            anchor[b(i, 1)] = observed[i];
        }
        let cc = ConvexConstraint::new(move |v: &[f64]| arm_mutual_information(v, px), theta)
            .with_gradient(move |v: &[f64]| arm_mutual_information_gradient(v, px))
            .with_anchor(anchor);
        solve_both(&lp, Some(&cc))?
    };
    let raw = Interval::from_endpoints(lo, hi, 1e-9)?;
    Ok(Interval {
        lower: raw.lower.clamp(0.0, 1.0),
        upper: raw.upper.clamp(0.0, 1.0),
    })
}

/// ATE bounds `[LB₁ − UB₀, UB₁ − LB₀]` from the two arm programs.
pub fn entropy_ate(j: &BinaryJoint, theta: f64) -> Result<Interval> {
    let (a1, a0) = rayon::join(
        || entropy_do_bound(j, 1, theta),
        || entropy_do_bound(j, 0, theta),
    );
    let (a1, a0) = (a1?, a0?);
    let raw = Interval {
        lower: a1.lower - a0.upper,
        upper: a1.upper - a0.lower,
    };
    Ok(clip_to_ceiling(raw, Query::Ate).interval)
}

/// `I(X; (Y₀, Y₁)) = KL(q ‖ r)` in bits, with `r` the product of the
/// marginals of `q`. Index `i = 4·y1 + 2·y0 + x`.
pub fn pns_mutual_information(q: &[f64]) -> f64 {
    let (px, ps) = pns_marginals(q);
    q.iter()
        .enumerate()
        .map(|(i, &v)| kl_term(v, ps[i >> 1] * px[i & 1]))
        .sum()
}

fn pns_marginals(q: &[f64]) -> ([f64; 2], [f64; 4]) {
    let mut px = [0.0; 2];
    let mut ps = [0.0; 4];
    for (i, &v) in q.iter().enumerate() {
        px[i & 1] += v;
        ps[i >> 1] += v;
    }
    (px, ps)
}

/// Gradient of [`pns_mutual_information`] as a function on all of `ℝ⁸`:
/// `log2(q_i / r_i) − 1/ln 2`.
fn pns_mutual_information_gradient(q: &[f64]) -> Vec<f64> {
    let (px, ps) = pns_marginals(q);
    (0..8)
        .map(|i| log2_ratio(q[i], ps[i >> 1] * px[i & 1]) - std::f64::consts::LOG2_E)
        .collect()
}

/// PNS bounds under `I(X; (Y₀, Y₁)) ≤ θ`.
pub fn entropy_pns(j: &BinaryJoint, theta: f64) -> Result<Interval> {
    check_theta(theta)?;
    let mut lp = crate::lp_bounds::conf_program(j)
        .with_objective(crate::lp_bounds::conf_objective(Query::Pns));
    lp.add_eq(vec![1.0; 8], 1.0);
    let px = [j.px(0), j.px(1)];

    let (lo, hi) = if theta <= 0.0 {
        // q(s, 1) P(X=0) = q(s, 0) P(X=1) for every outcome type s.
        for s in 0..4 {
            let mut row = vec![0.0; 8];
            row[2 * s + 1] = px[0];
            row[2 * s] = -px[1];
            lp.add_eq(row, 0.0);
        }
        solve_both(&lp, None)?
    } else {
        // Independent coupling of the observed arm conditionals.
        let p1 = j.p_y1_given(1).unwrap_or(0.5);
        let p0 = j.p_y1_given(0).unwrap_or(0.5);
        let anchor: Vec<f64> = (0..8)
            .map(|i| {
                let (x, y0, y1) = (i & 1, (i >> 1) & 1, (i >> 2) & 1);
                let f1 = if y1 == 1 { p1 } else { 1.0 - p1 };
                let f0 = if y0 == 1 { p0 } else { 1.0 - p0 };
                f1 * f0 * px[x]
            })
            .collect();
        let cc = ConvexConstraint::new(pns_mutual_information, theta)
            .with_gradient(pns_mutual_information_gradient)
            .with_anchor(anchor);
        solve_both(&lp, Some(&cc))?
    };
    let raw = Interval::from_endpoints(lo, hi, 1e-9)?;
    Ok(clip_to_ceiling(raw, Query::Pns).interval)
}
