//! Randomized structural causal models for the five benchmark scenarios,
//! their finite-population ground truths, and outcome binarization.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::closedform::normal_cdf;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::info::{binary_entropy, invert_binary_entropy};
use crate::seed::derive_seed;

/// Number of confounder-entropy levels in [`Scenario::BinaryEntropyConf`].
pub const ENTROPY_LEVELS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    BinaryConf,
    BinaryIV,
    ContConf,
    ContIV,
    BinaryEntropyConf,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::BinaryConf,
        Scenario::BinaryIV,
        Scenario::ContConf,
        Scenario::ContIV,
        Scenario::BinaryEntropyConf,
    ];

    /// Stable identifier mixed into per-simulation seeds.
    pub fn id(self) -> u64 {
        match self {
            Scenario::BinaryConf => 1,
            Scenario::BinaryIV => 2,
            Scenario::ContConf => 3,
            Scenario::ContIV => 4,
            Scenario::BinaryEntropyConf => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::BinaryConf => "BinaryConf",
            Scenario::BinaryIV => "BinaryIV",
            Scenario::ContConf => "ContConf",
            Scenario::ContIV => "ContIV",
            Scenario::BinaryEntropyConf => "BinaryEntropyConf",
        }
    }

    pub fn has_instrument(self) -> bool {
        matches!(self, Scenario::BinaryIV | Scenario::ContIV)
    }

    pub fn has_binary_outcome(self) -> bool {
        !matches!(self, Scenario::ContConf | Scenario::ContIV)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown scenario `{s}`")))
    }
}

/// How the two counterfactual Bernoulli outcomes of a unit are coupled when
/// computing the PNS ground truth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PnsCoupling {
    /// One shared exogenous uniform drives both worlds: `max(0, p1 - p0)`.
    #[default]
    Comonotonic,
    /// Independent draws: `p1 (1 - p0)`.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub scenario: Scenario,
    #[serde(rename = "N")]
    pub n_sims: usize,
    #[serde(rename = "n")]
    pub n_units: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub pns_coupling: PnsCoupling,
}

impl SimulationConfig {
    pub fn new(scenario: Scenario, n_sims: usize, n_units: usize, master_seed: u64) -> Self {
        SimulationConfig {
            scenario,
            n_sims,
            n_units,
            master_seed,
            pns_coupling: PnsCoupling::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sims < 1 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        if self.n_units < 2 {
            return Err(Error::InvalidInput("n must be at least 2".into()));
        }
        Ok(())
    }

    /// Seed of simulation `j` (1-based).
    pub fn sim_seed(&self, j: usize) -> u64 {
        derive_seed(&[self.master_seed, self.scenario.id(), j as u64])
    }
}

/// Squashing functions mapping a linear predictor into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Squash {
    Sigmoid,
    HalfTanh,
    SoftplusRatio,
    ProbitCdf,
}

impl Squash {
    pub const ALL: [Squash; 4] = [
        Squash::Sigmoid,
        Squash::HalfTanh,
        Squash::SoftplusRatio,
        Squash::ProbitCdf,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Squash::Sigmoid => sigmoid(x),
            Squash::HalfTanh => 0.5 * (1.0 + x.tanh()),
            Squash::SoftplusRatio => {
                let sp = softplus(x);
                sp / (1.0 + sp)
            }
            Squash::ProbitCdf => normal_cdf(x),
        }
    }
}

pub fn squash(id: Squash, x: f64) -> f64 {
    id.apply(x)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Feature transforms applied to a continuous confounder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Identity,
    Sin,
    Cos,
    Tanh,
    LogAbs,
    Gaussian,
    Sigmoid,
    ExpClip,
    ShiftedSigmoid,
    SinPi,
    ClipFifth,
    Softsign,
}

/// The sampling list; `Tanh` appears twice.
pub const TRANSFORMS: [Transform; 13] = [
    Transform::Identity,
    Transform::Sin,
    Transform::Cos,
    Transform::Tanh,
    Transform::LogAbs,
    Transform::Gaussian,
    Transform::Sigmoid,
    Transform::ExpClip,
    Transform::Tanh,
    Transform::ShiftedSigmoid,
    Transform::SinPi,
    Transform::ClipFifth,
    Transform::Softsign,
];

impl Transform {
    /// `mu` is the sample mean of the inputs (used by `ShiftedSigmoid`).
    pub fn apply(self, x: f64, mu: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Sin => x.sin(),
            Transform::Cos => x.cos(),
            Transform::Tanh => x.tanh(),
            Transform::LogAbs => x.abs().ln_1p(),
            Transform::Gaussian => (-x * x).exp(),
            Transform::Sigmoid => sigmoid(x),
            Transform::ExpClip => x.clamp(-5.0, 5.0).exp(),
            Transform::ShiftedSigmoid => sigmoid(x - mu),
            Transform::SinPi => (std::f64::consts::PI * x).sin(),
            Transform::ClipFifth => (x / 5.0).clamp(-1.0, 1.0),
            Transform::Softsign => x / (1.0 + x.abs()),
        }
    }
}

pub fn transform(id: Transform, x: f64, mu: f64) -> f64 {
    id.apply(x, mu)
}

/// Simulation-level parameters. Optional fields are present only in the
/// scenarios that use them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralParams {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub beta_ux: f64,
    pub beta_uy: f64,
    pub beta_xy: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta_zx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_z: Option<f64>,
    pub f_x: Squash,
    pub f_y: Squash,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g_ux: Option<Transform>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g_uy: Option<Transform>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h_target: Option<f64>,
    /// Unit-level noise switched off.
    #[serde(default)]
    pub noiseless: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub scenario: Scenario,
    pub j: usize,
    pub dataset: Dataset,
    pub true_ate: f64,
    pub true_pns: Option<f64>,
    /// Entropy of a binary confounder in bits.
    pub h_u: Option<f64>,
    pub params: StructuralParams,
}

/// JSON sidecar describing a simulation's ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub scenario: Scenario,
    pub j: usize,
    pub true_ate: f64,
    pub true_pns: Option<f64>,
    pub h_u: Option<f64>,
    pub params: StructuralParams,
}

impl SimulationRecord {
    pub fn truth(&self) -> Truth {
        Truth {
            scenario: self.scenario,
            j: self.j,
            true_ate: self.true_ate,
            true_pns: self.true_pns,
            h_u: self.h_u,
            params: self.params.clone(),
        }
    }
}

/// `β_{X→Y}` for position `k` (0-based) of a grid with `m` points over
/// `[-5, 5]`.
pub fn beta_grid(k: usize, m: usize) -> f64 {
    if m <= 1 {
        return -5.0;
    }
    if k + 1 == m {
        return 5.0;
    }
    -5.0 + 10.0 * k as f64 / (m - 1) as f64
}

/// Entropy level of simulation `j` out of `n_sims`: `(level, position in
/// level, simulations in level)`.
pub fn entropy_level(j: usize, n_sims: usize) -> (usize, usize, usize) {
    let first = |l: usize| (l * n_sims).div_ceil(ENTROPY_LEVELS);
    let level = ((j - 1) * ENTROPY_LEVELS / n_sims).min(ENTROPY_LEVELS - 1);
    (level, j - 1 - first(level), first(level + 1) - first(level))
}

/// Target confounder entropy of a level: `0.05, 0.15, ..., 0.95`.
pub fn level_entropy(level: usize) -> f64 {
    (2 * level + 1) as f64 / 20.0
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn bimodal<R: Rng>(rng: &mut R) -> f64 {
    let centre = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    centre + 0.5 * normal(rng)
}

/// Draws the simulation-level parameters of simulation `j`.
pub fn sample_params<R: Rng>(j: usize, cfg: &SimulationConfig, rng: &mut R) -> Result<StructuralParams> {
    let sc = cfg.scenario;
    let continuous = !sc.has_binary_outcome();
    let (beta_xy, h_target) = if sc == Scenario::BinaryEntropyConf {
        let (level, k, m) = entropy_level(j, cfg.n_sims);
        (beta_grid(k, m), Some(level_entropy(level)))
    } else {
        (beta_grid(j - 1, cfg.n_sims), None)
    };

    let (p_u, sigma_u) = match h_target {
        Some(h) => {
            let reflect = rng.random_bool(0.5);
            (Some(invert_binary_entropy(h, reflect)?), None)
        }
        None if continuous => (None, Some(normal(rng).abs())),
        None => (Some(rng.random::<f64>()), None),
    };
    let p_z = sc.has_instrument().then(|| rng.random::<f64>());
    let alpha_x = normal(rng);
    let alpha_y = normal(rng);
    let beta_ux = bimodal(rng);
    let beta_uy = bimodal(rng);
    let beta_zx = sc.has_instrument().then(|| bimodal(rng));
    let f_x = Squash::ALL[rng.random_range(0..4)];
    let f_y = Squash::ALL[rng.random_range(0..4)];
    let (g_ux, g_uy, sigma_x, sigma_y) = if continuous {
        (
            Some(TRANSFORMS[rng.random_range(0..TRANSFORMS.len())]),
            Some(TRANSFORMS[rng.random_range(0..TRANSFORMS.len())]),
            Some(normal(rng).abs()),
            Some(normal(rng).abs()),
        )
    } else {
        (None, None, None, None)
    };
    Ok(StructuralParams {
        alpha_x,
        alpha_y,
        beta_ux,
        beta_uy,
        beta_xy,
        beta_zx,
        p_u,
        sigma_u,
        p_z,
        f_x,
        f_y,
        g_ux,
        g_uy,
        sigma_x,
        sigma_y,
        h_target,
        noiseless: h_target.is_some(),
    })
}

/// A simulated sample with its finite-population ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub dataset: Dataset,
    pub true_ate: f64,
    pub true_pns: Option<f64>,
}

/// Draws `n` units from a fully specified model.
pub fn simulate_units<R: Rng>(
    params: &StructuralParams,
    n: usize,
    coupling: PnsCoupling,
    rng: &mut R,
) -> Result<Simulated> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    match (params.p_u, params.sigma_u) {
        (Some(p_u), _) => Ok(simulate_binary(params, p_u, n, coupling, rng)),
        (None, Some(sigma_u)) => Ok(simulate_continuous(params, sigma_u, n, rng)),
        (None, None) => Err(Error::InvalidInput("params lack a confounder law".into())),
    }
}

fn simulate_binary<R: Rng>(
    p: &StructuralParams,
    p_u: f64,
    n: usize,
    coupling: PnsCoupling,
    rng: &mut R,
) -> Simulated {
    let mut z_col = p.p_z.map(|_| Vec::with_capacity(n));
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let (mut ate, mut pns) = (0.0, 0.0);
    for _ in 0..n {
        let u = f64::from(u8::from(rng.random::<f64>() < p_u));
        let (ex, ey) = if p.noiseless {
            (0.0, 0.0)
        } else {
            let s = normal(rng).abs();
            (s * normal(rng), s * normal(rng))
        };
        let mut xs = p.alpha_x + p.beta_ux * u + ex;
        if let (Some(pz), Some(bz), Some(zc)) = (p.p_z, p.beta_zx, z_col.as_mut()) {
            let z = u8::from(rng.random::<f64>() < pz);
            xs += bz * f64::from(z);
            zc.push(z);
        }
        let xi = u8::from(rng.random::<f64>() < p.f_x.apply(xs));
        let base = p.alpha_y + p.beta_uy * u + ey;
        let p0 = p.f_y.apply(base);
        let p1 = p.f_y.apply(base + p.beta_xy);
        // One exogenous uniform shared by both counterfactual worlds.
        let v: f64 = rng.random();
        let py = if xi == 1 { p1 } else { p0 };
        x.push(xi);
        y.push(if v < py { 1.0 } else { 0.0 });
        ate += p1 - p0;
        pns += match coupling {
            PnsCoupling::Comonotonic => (p1 - p0).max(0.0),
            PnsCoupling::Independent => p1 * (1.0 - p0),
        };
    }
    let nf = n as f64;
    Simulated {
        dataset: Dataset::new(z_col, x, y).expect("generated columns are valid"),
        true_ate: ate / nf,
        true_pns: Some(pns / nf),
    }
}

fn simulate_continuous<R: Rng>(p: &StructuralParams, sigma_u: f64, n: usize, rng: &mut R) -> Simulated {
    let sigma_x = p.sigma_x.unwrap_or(1.0);
    let sigma_y = p.sigma_y.unwrap_or(1.0);
    let g_ux = p.g_ux.unwrap_or(Transform::Identity);
    let g_uy = p.g_uy.unwrap_or(Transform::Identity);

    let u: Vec<f64> = (0..n).map(|_| sigma_u * normal(rng)).collect();
    let mu = u.iter().sum::<f64>() / n as f64;
    let mut z_col = p.p_z.map(|_| Vec::with_capacity(n));
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut ate = 0.0;
    for &ui in &u {
        let (ex, ey) = if p.noiseless {
            (0.0, 0.0)
        } else {
            let sx = (sigma_x * normal(rng)).abs();
            let sy = (sigma_y * normal(rng)).abs();
            (sx * normal(rng), sy * normal(rng))
        };
        let mut xs = p.alpha_x + p.beta_ux * g_ux.apply(ui, mu) + ex;
        if let (Some(pz), Some(bz), Some(zc)) = (p.p_z, p.beta_zx, z_col.as_mut()) {
            let z = u8::from(rng.random::<f64>() < pz);
            xs += bz * f64::from(z);
            zc.push(z);
        }
        let xi = u8::from(rng.random::<f64>() < p.f_x.apply(xs));
        let base = p.alpha_y + p.beta_uy * g_uy.apply(ui, mu) + ey;
        let y0 = p.f_y.apply(base);
        let y1 = p.f_y.apply(base + p.beta_xy);
        x.push(xi);
        y.push(if xi == 1 { y1 } else { y0 });
        ate += y1 - y0;
    }
    Simulated {
        dataset: Dataset::new(z_col, x, y).expect("generated columns are valid"),
        true_ate: ate / n as f64,
        true_pns: None,
    }
}

/// Generates simulation `j` (1-based) of a sweep. The result depends only on
/// `cfg` and `j`.
pub fn generate(j: usize, cfg: &SimulationConfig) -> Result<SimulationRecord> {
    cfg.validate()?;
    if j == 0 || j > cfg.n_sims {
        return Err(Error::InvalidInput(format!("simulation index {j} outside 1..={}", cfg.n_sims)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sim_seed(j));
    let params = sample_params(j, cfg, &mut rng)?;
    let sim = simulate_units(&params, cfg.n_units, cfg.pns_coupling, &mut rng)?;
    Ok(SimulationRecord {
        scenario: cfg.scenario,
        j,
        dataset: sim.dataset,
        true_ate: sim.true_ate,
        true_pns: sim.true_pns,
        h_u: params.p_u.map(binary_entropy).transpose()?,
        params,
    })
}

pub fn gen_binary_conf(j: usize, cfg: &SimulationConfig) -> Result<SimulationRecord> {
    generate(j, &SimulationConfig { scenario: Scenario::BinaryConf, ..*cfg })
}

pub fn gen_binary_iv(j: usize, cfg: &SimulationConfig) -> Result<SimulationRecord> {
    generate(j, &SimulationConfig { scenario: Scenario::BinaryIV, ..*cfg })
}

pub fn gen_cont_conf(j: usize, cfg: &SimulationConfig) -> Result<SimulationRecord> {
    generate(j, &SimulationConfig { scenario: Scenario::ContConf, ..*cfg })
}

pub fn gen_cont_iv(j: usize, cfg: &SimulationConfig) -> Result<SimulationRecord> {
    generate(j, &SimulationConfig { scenario: Scenario::ContIV, ..*cfg })
}

pub fn gen_binary_entropy_conf(j: usize, cfg: &SimulationConfig) -> Result<SimulationRecord> {
    generate(j, &SimulationConfig { scenario: Scenario::BinaryEntropyConf, ..*cfg })
}

/// Maps outcomes above `threshold` to 1 and the rest to 0.
pub fn binarize(d: &Dataset, threshold: f64) -> Dataset {
    let y = d
        .y()
        .iter()
        .map(|&v| if v > threshold { 1.0 } else { 0.0 })
        .collect();
    d.with_outcome(y)
}
