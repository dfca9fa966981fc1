//! Dense linear programming and a cutting-plane extension for one convex
//! inequality. Problem sizes here are tiny (tens of variables), so the
//! solvers favour robustness over speed.

mod cutting_plane;
mod simplex;

pub use cutting_plane::{solve_convex_cut, ConvexConstraint, DEFAULT_CUT_TOL, DEFAULT_MAX_CUTS};
pub use simplex::solve_lp;

use crate::error::{Error, Result};

/// Primal feasibility tolerance used by phase one.
pub const FEAS_TOL: f64 = 1e-9;
/// Residual tolerance every returned optimum is checked against.
pub const RESIDUAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// `min/max objective·v` subject to equality rows, `≤` rows and per-variable
/// bounds `lo ≤ v ≤ hi` (`lo` finite, `hi` may be `+∞`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub nvars: usize,
    pub objective: Vec<f64>,
    pub eq_constraints: Vec<(Vec<f64>, f64)>,
    pub ineq_constraints: Vec<(Vec<f64>, f64)>,
    pub var_bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// An empty program over `nvars` non-negative variables.
    pub fn new(nvars: usize) -> Self {
        LinearProgram {
            nvars,
            objective: vec![0.0; nvars],
            eq_constraints: Vec::new(),
            ineq_constraints: Vec::new(),
            var_bounds: vec![(0.0, f64::INFINITY); nvars],
        }
    }

    pub fn with_objective(mut self, objective: Vec<f64>) -> Self {
        self.objective = objective;
        self
    }

    pub fn add_eq(&mut self, coefs: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_constraints.push((coefs, rhs));
        self
    }

    /// Adds `coefs·v ≤ rhs`.
    pub fn add_le(&mut self, coefs: Vec<f64>, rhs: f64) -> &mut Self {
        self.ineq_constraints.push((coefs, rhs));
        self
    }

    /// Adds `coefs·v ≥ rhs`.
    pub fn add_ge(&mut self, coefs: Vec<f64>, rhs: f64) -> &mut Self {
        self.ineq_constraints
            .push((coefs.into_iter().map(|c| -c).collect(), -rhs));
        self
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.var_bounds[var] = (lo, hi);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("malformed LP: {what}")));
        if self.objective.len() != self.nvars || self.var_bounds.len() != self.nvars {
            return bad("objective/bounds length");
        }
        for (row, rhs) in self.eq_constraints.iter().chain(&self.ineq_constraints) {
            if row.len() != self.nvars || !rhs.is_finite() || row.iter().any(|c| !c.is_finite()) {
                return bad("constraint row");
            }
        }
        for &(lo, hi) in &self.var_bounds {
            if !lo.is_finite() || hi.is_nan() || lo > hi {
                return bad("variable bounds");
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return bad("objective");
        }
        Ok(())
    }

    pub fn objective_value(&self, point: &[f64]) -> f64 {
        dot(&self.objective, point)
    }

    /// Largest violation of any constraint or bound at `point`. Rows with
    /// coefficients larger than one are measured after scaling them to unit
    /// max-norm.
    pub fn max_violation(&self, point: &[f64]) -> f64 {
        let scale = |row: &[f64]| row.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for (row, rhs) in &self.eq_constraints {
            worst = worst.max((dot(row, point) - rhs).abs() / scale(row));
        }
        for (row, rhs) in &self.ineq_constraints {
            worst = worst.max((dot(row, point) - rhs) / scale(row));
        }
        for (v, &(lo, hi)) in point.iter().zip(&self.var_bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub point: Vec<f64>,
    /// Cuts added by [`solve_convex_cut`]; zero for plain LPs.
    pub cuts: usize,
    /// Objective distance between the returned (outer) optimum and a point
    /// that satisfies the convex constraint exactly, when one is known.
    pub gap: Option<f64>,
}

impl LpSolution {
    pub(crate) fn without_optimum(status: LpStatus) -> Self {
        LpSolution {
            status,
            value: f64::NAN,
            point: Vec::new(),
            cuts: 0,
            gap: None,
        }
    }

    /// The optimal value, or the matching error for a non-optimal status.
    pub fn optimal_value(&self) -> Result<f64> {
        match self.status {
            LpStatus::Optimal => Ok(self.value),
            LpStatus::Infeasible => Err(Error::Infeasible),
            LpStatus::Unbounded => Err(Error::Unbounded),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
