//! EMCC: bounds from the spread of a query over repeated EM fits of
//! canonical structural causal models.
//!
//! Confounded DAG: 8 latent states `u = 4·a + t`, with `a` the treatment the
//! unit takes and `t` its outcome type (`Y(x) = (t >> x) & 1`).
//! IV DAG: 16 latent states `u = 4·r + t`, with compliance type `r`
//! (`X(z) = (r >> z) & 1`). In both, `t = 2` is a responder and `t = 1` a
//! contrarian.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{BinaryJoint, IvJoint};
use crate::error::{Error, Result};
use crate::lp_bounds::{compliance_x, outcome_type_weights, outcome_y};
use crate::query::{clip_to_ceiling, Interval, Query};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dag {
    Conf,
    Iv,
}

impl Dag {
    pub fn n_states(self) -> usize {
        match self {
            Dag::Conf => 8,
            Dag::Iv => 16,
        }
    }
}

/// Observed data in the form EM consumes: cell counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EmData {
    Conf(BinaryJoint),
    Iv(IvJoint),
}

impl EmData {
    pub fn dag(&self) -> Dag {
        match self {
            EmData::Conf(_) => Dag::Conf,
            EmData::Iv(_) => Dag::Iv,
        }
    }

    /// `(count, consistent states)` for every observed cell.
    fn cells(&self) -> Vec<(f64, Vec<usize>)> {
        match self {
            EmData::Conf(j) => {
                let counts = j.counts();
                let mut out = Vec::with_capacity(4);
                for x in 0..2 {
                    for y in 0..2 {
                        let states = (0..4)
                            .filter(|&t| outcome_y(t, x) == y)
                            .map(|t| 4 * x + t)
                            .collect();
                        out.push((counts[x][y], states));
                    }
                }
                out
            }
            EmData::Iv(j) => {
                let counts = j.counts();
                let mut out = Vec::with_capacity(8);
                for z in 0..2 {
                    for x in 0..2 {
                        for y in 0..2 {
                            let states = (0..16)
                                .filter(|&u| compliance_x(u / 4, z) == x && outcome_y(u % 4, x) == y)
                                .collect();
                            out.push((counts[z][x][y], states));
                        }
                    }
                }
                out
            }
        }
    }

    fn instrument(&self) -> Option<f64> {
        match self {
            EmData::Conf(_) => None,
            EmData::Iv(j) => Some(j.pz),
        }
    }
}

/// A fully specified canonical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalScm {
    pub dag: Dag,
    pub p_u: Vec<f64>,
    /// `P(Z = 1)`, held at its empirical value (IV only).
    pub pz: Option<f64>,
}

impl CanonicalScm {
    /// Observable distribution `P(X, Y)` (Conf) or `P(X, Y | Z = z)` (IV).
    pub fn observable(&self, z: Option<usize>) -> [[f64; 2]; 2] {
        let mut p = [[0.0; 2]; 2];
        for (u, &m) in self.p_u.iter().enumerate() {
            let (r, t) = (u / 4, u % 4);
            let x = match (self.dag, z) {
                (Dag::Conf, _) => r,
                (Dag::Iv, Some(z)) => compliance_x(r, z),
                (Dag::Iv, None) => panic!("IV observable needs an instrument value"),
            };
            p[x][outcome_y(t, x)] += m;
        }
        p
    }
}

/// Query value of a fitted model, read off the outcome-type marginal.
pub fn scm_query(m: &CanonicalScm, q: Query) -> f64 {
    let w = outcome_type_weights(q);
    m.p_u.iter().enumerate().map(|(u, &p)| w[u % 4] * p).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub runs: usize,
    pub maxiter: usize,
    /// Absolute log-likelihood improvement (nats) below which a run stops.
    pub loglik_tol: f64,
    pub seed: u64,
    /// Symmetric Dirichlet concentration for the random initializations.
    pub init_concentration: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            runs: 30,
            maxiter: 100,
            loglik_tol: 1e-6,
            seed: 0,
            init_concentration: 0.1,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.maxiter == 0 {
            return Err(Error::InvalidInput("EM needs runs >= 1 and maxiter >= 1".into()));
        }
        if !(self.init_concentration > 0.0) {
            return Err(Error::InvalidInput("Dirichlet concentration must be > 0".into()));
        }
        Ok(())
    }
}

/// A converged (or iteration-capped) EM run.
#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub model: CanonicalScm,
    /// Log-likelihood before the first update and after every iteration.
    pub loglik: Vec<f64>,
}

fn loglik(cells: &[(f64, Vec<usize>)], p_u: &[f64]) -> f64 {
    cells
        .iter()
        .filter(|(n, _)| *n > 0.0)
        .map(|(n, states)| {
            let mass: f64 = states.iter().map(|&u| p_u[u]).sum();
            n * mass.ln()
        })
        .sum()
}

/// Runs EM from `init` until the log-likelihood gain drops below
/// `cfg.loglik_tol` or `cfg.maxiter` iterations have run.
pub fn em_run(data: &EmData, init: &[f64], cfg: &EmConfig) -> Result<EmFit> {
    let dag = data.dag();
    if init.len() != dag.n_states() {
        return Err(Error::InvalidInput(format!(
            "init has {} states, expected {}",
            init.len(),
            dag.n_states()
        )));
    }
    let total: f64 = init.iter().sum();
    if init.iter().any(|&v| !(v >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput("init is not a probability vector".into()));
    }
    let cells = data.cells();
    let n_total: f64 = cells.iter().map(|c| c.0).sum();

    let mut p = init.to_vec();
    let mut trace = vec![loglik(&cells, &p)];
    for _ in 0..cfg.maxiter {
        let mut next = vec![0.0; p.len()];
        for (n, states) in &cells {
            if *n <= 0.0 {
                continue;
            }
            let share = n / n_total;
            let mass: f64 = states.iter().map(|&u| p[u]).sum();
            if mass > 0.0 {
                for &u in states {
                    next[u] += share * p[u] / mass;
                }
            } else {
                let even = share / states.len() as f64;
                for &u in states {
                    next[u] += even;
                }
            }
        }
        let ll = loglik(&cells, &next);
        let prev = *trace.last().unwrap();
        p = next;
        trace.push(ll);
        if (ll - prev).abs() < cfg.loglik_tol {
            break;
        }
    }
    Ok(EmFit {
        model: CanonicalScm {
            dag,
            p_u: p,
            pz: data.instrument(),
        },
        loglik: trace,
    })
}

fn dirichlet_init(n: usize, alpha: f64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw: Vec<f64> = match n {
        8 => Dirichlet::new([alpha; 8]).map(|d| d.sample(&mut rng).to_vec()),
        16 => Dirichlet::new([alpha; 16]).map(|d| d.sample(&mut rng).to_vec()),
        _ => unreachable!("canonical models have 8 or 16 states"),
    }
    .map_err(|e| Error::InvalidInput(format!("Dirichlet: {e}")))?;
    let s: f64 = draw.iter().sum();
    Ok(draw.iter().map(|v| v / s).collect())
}

/// Fits `cfg.runs` models from seeded random initializations and returns
/// every fit, in run order.
pub fn emcc_fits(data: &EmData, cfg: &EmConfig) -> Result<Vec<EmFit>> {
    cfg.validate()?;
    let n = data.dag().n_states();
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let init = dirichlet_init(n, cfg.init_concentration, derive_seed(&[cfg.seed, run as u64]))?;
            em_run(data, &init, cfg)
        })
        .collect()
}

/// `[min, max]` of the query over the EM fits, clipped to the ceiling.
pub fn emcc_bounds(data: &EmData, q: Query, cfg: &EmConfig) -> Result<Interval> {
    let values: Vec<f64> = emcc_fits(data, cfg)?
        .iter()
        .map(|f| scm_query(&f.model, q))
        .collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(clip_to_ceiling(Interval { lower: lo, upper: hi }, q).interval)
}
