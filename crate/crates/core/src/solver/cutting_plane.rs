use super::{dot, solve_lp, LinearProgram, LpSolution, LpStatus, Sense};
use crate::error::{Error, Result};

pub const DEFAULT_CUT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_CUTS: usize = 200;
const FD_STEP: f64 = 1e-7;
/// Fraction of the way toward the anchor at which cuts are linearized.
const INTERIOR_PULL: f64 = 1e-9;

type Gradient<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a>;

/// A convex inequality `g(v) ≤ bound` layered on top of a linear program.
///
/// `g` must be convex on the LP-feasible region. `anchor`, when given, is an
/// LP-feasible point with `g(anchor) ≤ bound`, ideally in the relative
/// interior. It is used to report the cutting-plane gap, and cuts are taken
/// a hair toward it so that functions with infinite slope on the boundary
/// (entropies) still yield valid tangents.
///
/// Without an explicit `gradient`, central finite differences are used.
pub struct ConvexConstraint<'a> {
    pub evaluate: Box<dyn Fn(&[f64]) -> f64 + Send + Sync + 'a>,
    pub gradient: Option<Gradient<'a>>,
    pub bound: f64,
    pub anchor: Option<Vec<f64>>,
}

impl<'a> ConvexConstraint<'a> {
    pub fn new(evaluate: impl Fn(&[f64]) -> f64 + Send + Sync + 'a, bound: f64) -> Self {
        ConvexConstraint {
            evaluate: Box::new(evaluate),
            gradient: None,
            bound,
            anchor: None,
        }
    }

    pub fn with_anchor(mut self, anchor: Vec<f64>) -> Self {
        self.anchor = Some(anchor);
        self
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a,
    ) -> Self {
        self.gradient = Some(Box::new(gradient));
        self
    }

    fn gradient(&self, v: &[f64]) -> Vec<f64> {
        if let Some(grad) = &self.gradient {
            return grad(v);
        }
        let mut probe = v.to_vec();
        (0..v.len())
            .map(|i| {
                let orig = probe[i];
                probe[i] = orig + FD_STEP;
                let up = (self.evaluate)(&probe);
                probe[i] = orig - FD_STEP;
                let down = (self.evaluate)(&probe);
                probe[i] = orig;
                (up - down) / (2.0 * FD_STEP)
            })
            .collect()
    }

    /// Objective distance from `point` back along the segment to the anchor
    /// until `g ≤ bound` holds exactly.
    fn gap(&self, lp: &LinearProgram, point: &[f64]) -> Option<f64> {
        let anchor = self.anchor.as_ref()?;
        if (self.evaluate)(anchor) > self.bound {
            return None;
        }
        let at = |t: f64| -> Vec<f64> {
            anchor
                .iter()
                .zip(point)
                .map(|(a, p)| a + t * (p - a))
                .collect()
        };
        if (self.evaluate)(point) <= self.bound {
            return Some(0.0);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if (self.evaluate)(&at(mid)) <= self.bound {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some((lp.objective_value(point) - lp.objective_value(&at(lo))).abs())
    }
}

/// Kelley's cutting-plane method for `lp` plus one convex constraint.
///
/// Each round solves the LP relaxation; if the optimum violates
/// `g ≤ bound + tol`, the linearization of `g` at that point (central finite
/// differences) is appended as a new row and the LP is re-solved. The last
/// LP optimum is returned, so the value is an outer approximation whose
/// distance to the true optimum is reported in `gap` when an anchor exists.
pub fn solve_convex_cut(
    lp: &LinearProgram,
    cc: &ConvexConstraint<'_>,
    sense: Sense,
    tol: f64,
    max_cuts: usize,
) -> Result<LpSolution> {
    let mut work = lp.clone();
    for cuts in 0..=max_cuts {
        let mut sol = solve_lp(&work, sense)?;
        if sol.status != LpStatus::Optimal {
            sol.cuts = cuts;
            return Ok(sol);
        }
        let gv = (cc.evaluate)(&sol.point);
        if gv <= cc.bound + tol {
            sol.cuts = cuts;
            sol.gap = cc.gap(lp, &sol.point);
            return Ok(sol);
        }
        if cuts == max_cuts {
            break;
        }
        let at: Vec<f64> = match &cc.anchor {
            Some(a) => sol
                .point
                .iter()
                .zip(a)
                .map(|(p, a)| p + INTERIOR_PULL * (a - p))
                .collect(),
            None => sol.point.clone(),
        };
        let g_at = (cc.evaluate)(&at);
        let grad = cc.gradient(&at);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical("non-finite constraint gradient".into()));
        }
        if grad.iter().all(|g| g.abs() < 1e-14) {
            return Err(Error::Numerical(
                "convex constraint violated at a stationary point".into(),
            ));
        }
        // g(u) + ∇g(u)·(v - u) ≤ bound, with u the linearization point
        let rhs = cc.bound - g_at + dot(&grad, &at);
        work.add_le(grad, rhs);
    }
    Err(Error::CuttingPlaneNotConverged)
}
