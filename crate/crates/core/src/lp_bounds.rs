//! Sharp bounds from linear programs over response-type distributions.
//!
//! Confounded DAG: 8 masses `q_i` with `i = 4·y1 + 2·y0 + x`, i.e. the
//! observed treatment together with the potential outcomes `(Y₀, Y₁)`.
//!
//! IV DAG: 16 masses indexed `4·r + t`, where the compliance type `r` has
//! `X(z) = (r >> z) & 1` and the outcome type `t` has `Y(x) = (t >> x) & 1`.
//! So `r = 2` is a complier and `t = 2` a responder (`Y₀ = 0, Y₁ = 1`).

use crate::data::{BinaryJoint, Dataset, IvJoint};
use crate::error::{Error, Result};
use crate::query::{Interval, Query};
use crate::solver::{solve_lp, LinearProgram, LpStatus, Sense};

/// Slack for min/max endpoints that cross by solver round-off.
const ENDPOINT_SLACK: f64 = 1e-9;

pub(crate) fn compliance_x(r: usize, z: usize) -> usize {
    (r >> z) & 1
}

pub(crate) fn outcome_y(t: usize, x: usize) -> usize {
    (t >> x) & 1
}

/// Objective coefficients of `query` over the four outcome types `t`.
pub(crate) fn outcome_type_weights(query: Query) -> [f64; 4] {
    match query {
        // responder minus contrarian
        Query::Ate => [0.0, -1.0, 1.0, 0.0],
        Query::Pns => [0.0, 0.0, 1.0, 0.0],
    }
}

/// Minimizes and maximizes `objective` over `lp`; an infeasible program
/// maps to `infeasible`.
pub(crate) fn lp_range(
    lp: LinearProgram,
    objective: Vec<f64>,
    infeasible: Error,
) -> Result<Interval> {
    let lp = lp.with_objective(objective);
    let mut ends = [0.0; 2];
    for (slot, sense) in ends.iter_mut().zip([Sense::Min, Sense::Max]) {
        let sol = solve_lp(&lp, sense)?;
        *slot = match sol.status {
            LpStatus::Optimal => sol.value,
            LpStatus::Infeasible => return Err(infeasible),
            LpStatus::Unbounded => return Err(Error::Unbounded),
        };
    }
    Interval::from_endpoints(ends[0], ends[1], ENDPOINT_SLACK)
}

/// The response-type polytope of the confounded DAG for the joint `j`.
pub fn conf_program(j: &BinaryJoint) -> LinearProgram {
    let mut lp = LinearProgram::new(8);
    for x in 0..2 {
        for y in 0..2 {
            let mut row = vec![0.0; 8];
            for (i, c) in row.iter_mut().enumerate() {
                let (xi, y0, y1) = (i & 1, (i >> 1) & 1, (i >> 2) & 1);
                let observed = if xi == 1 { y1 } else { y0 };
                if xi == x && observed == y {
                    *c = 1.0;
                }
            }
            lp.add_eq(row, j.p[x][y]);
        }
    }
    lp
}

/// Objective of `query` over the 8 confounded-DAG masses.
pub fn conf_objective(query: Query) -> Vec<f64> {
    let w = outcome_type_weights(query);
    (0..8)
        .map(|i| {
            let (y0, y1) = ((i >> 1) & 1, (i >> 2) & 1);
            w[y0 | (y1 << 1)]
        })
        .collect()
}

/// Sharp no-assumption bounds on the confounded DAG.
pub fn conf_lp_bounds(j: &BinaryJoint, query: Query) -> Result<Interval> {
    lp_range(conf_program(j), conf_objective(query), Error::Infeasible)
}

/// The 16-type polytope of the binary IV DAG for the joint `j`.
pub fn iv_program(j: &IvJoint) -> LinearProgram {
    let mut lp = LinearProgram::new(16);
    for z in 0..2 {
        for x in 0..2 {
            for y in 0..2 {
                let mut row = vec![0.0; 16];
                for r in 0..4 {
                    for t in 0..4 {
                        if compliance_x(r, z) == x && outcome_y(t, x) == y {
                            row[4 * r + t] = 1.0;
                        }
                    }
                }
                lp.add_eq(row, j.cond[z][x][y]);
            }
        }
    }
    lp
}

/// Sharp bounds on the binary IV DAG.
pub fn iv_lp_bounds(j: &IvJoint, query: Query) -> Result<Interval> {
    if j.pz <= 0.0 || j.pz >= 1.0 {
        return Err(Error::DegenerateInstrumentArm);
    }
    let w = outcome_type_weights(query);
    let objective = (0..16).map(|i| w[i % 4]).collect();
    lp_range(iv_program(j), objective, Error::InconsistentIvData)
}

/// First and cross moments consumed by the continuous-outcome IV program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvMoments {
    /// `P(X = x | Z = z)` indexed `[z][x]`.
    pub px: [[f64; 2]; 2],
    /// `E[Y · 1{X = x} | Z = z]` indexed `[z][x]`.
    pub ey: [[f64; 2]; 2],
}

impl IvMoments {
    pub fn from_dataset(d: &Dataset) -> Result<Self> {
        let z = d.z().ok_or(Error::MissingInstrument)?;
        let mut n = [0.0f64; 2];
        let mut nx = [[0.0f64; 2]; 2];
        let mut sy = [[0.0f64; 2]; 2];
        for ((&z, &x), &y) in z.iter().zip(d.x()).zip(d.y()) {
            let (z, x) = (z as usize, x as usize);
            n[z] += 1.0;
            nx[z][x] += 1.0;
            sy[z][x] += y;
        }
        if n[0] == 0.0 || n[1] == 0.0 {
            return Err(Error::DegenerateInstrumentArm);
        }
        Ok(IvMoments {
            px: [0, 1].map(|z| nx[z].map(|c| c / n[z])),
            ey: [0, 1].map(|z| sy[z].map(|s| s / n[z])),
        })
    }

    pub fn from_iv_joint(j: &IvJoint) -> Self {
        IvMoments {
            px: [0, 1].map(|z| [0, 1].map(|x| j.px_given(z, x))),
            ey: [0, 1].map(|z| [0, 1].map(|x| j.cond[z][x][1])),
        }
    }
}

/// How the ATE is assembled from the continuous IV program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZbMode {
    /// Bound `E[Y₁]` and `E[Y₀]` separately and take `[LB₁−UB₀, UB₁−LB₀]`.
    #[default]
    Composed,
    /// Optimize `E[Y₁] − E[Y₀]` directly over one program.
    Joint,
}

fn mu(r: usize) -> usize {
    r
}

fn w(r: usize, x: usize) -> usize {
    4 + 2 * r + x
}

/// The `(μ, w)` program: `μ_r` is the mass of compliance type `r` and
/// `w_{r,x} = μ_r · E[Y_x | r]`, constrained by `0 ≤ w_{r,x} ≤ μ_r`.
pub fn continuous_iv_program(m: &IvMoments) -> LinearProgram {
    let mut lp = LinearProgram::new(12);
    let mut total = vec![0.0; 12];
    for r in 0..4 {
        total[mu(r)] = 1.0;
        for x in 0..2 {
            let mut row = vec![0.0; 12];
            row[w(r, x)] = 1.0;
            row[mu(r)] = -1.0;
            lp.add_le(row, 0.0);
        }
    }
    lp.add_eq(total, 1.0);
    for z in 0..2 {
        for x in 0..2 {
            let mut mass = vec![0.0; 12];
            let mut moment = vec![0.0; 12];
            for r in (0..4).filter(|&r| compliance_x(r, z) == x) {
                mass[mu(r)] = 1.0;
                moment[w(r, x)] = 1.0;
            }
            lp.add_eq(mass, m.px[z][x]);
            lp.add_eq(moment, m.ey[z][x]);
        }
    }
    lp
}

fn potential_mean_objective(x: usize) -> Vec<f64> {
    let mut c = vec![0.0; 12];
    for r in 0..4 {
        c[w(r, x)] = 1.0;
    }
    c
}

/// ATE bounds from the continuous-outcome IV program on precomputed moments.
pub fn zhangbareinboim_from_moments(m: &IvMoments, mode: ZbMode) -> Result<Interval> {
    let lp = continuous_iv_program(m);
    match mode {
        ZbMode::Composed => {
            let e1 = lp_range(
                lp.clone(),
                potential_mean_objective(1),
                Error::InconsistentIvData,
            )?;
            let e0 = lp_range(lp, potential_mean_objective(0), Error::InconsistentIvData)?;
            Ok(Interval {
                lower: e1.lower - e0.upper,
                upper: e1.upper - e0.lower,
            })
        }
        ZbMode::Joint => {
            let c: Vec<f64> = potential_mean_objective(1)
                .iter()
                .zip(potential_mean_objective(0))
                .map(|(a, b)| a - b)
                .collect();
            lp_range(lp, c, Error::InconsistentIvData)
        }
    }
}

/// ATE bounds for a `[0, 1]` outcome with a binary instrument, without
/// discretizing the outcome.
pub fn zhangbareinboim_ate(d: &Dataset, mode: ZbMode) -> Result<Interval> {
    zhangbareinboim_from_moments(&IvMoments::from_dataset(d)?, mode)
}
