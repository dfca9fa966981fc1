//! Run specification: a JSON document whose fields command-line flags
//! override.

use std::path::{Path, PathBuf};

use causal_bounds::em_bounds::EmConfig;
use causal_bounds::scenarios::{entropy_level, level_entropy, PnsCoupling, Scenario, SimulationConfig};
use serde::{Deserialize, Serialize};

use crate::algorithms::{default_algorithms, Algorithm, DEFAULT_THETA};
use crate::error::{CliError, CliResult};

pub const DEFAULT_N_SIMS: usize = 2000;
pub const DEFAULT_N_UNITS: usize = 500;

/// Every field is optional; unset fields fall back to defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub scenario: Option<String>,
    #[serde(rename = "N")]
    pub n_sims: Option<usize>,
    #[serde(rename = "n")]
    pub n_units: Option<usize>,
    pub seed: Option<u64>,
    /// Algorithm names; `None` selects the scenario's default suite.
    pub algorithms: Option<Vec<String>>,
    /// Cap used by algorithms named plain `entropybounds`.
    pub theta: Option<f64>,
    /// Entropy levels (`H_target` values) to keep in `BinaryEntropyConf`.
    pub levels: Option<Vec<f64>>,
    /// Run every requested algorithm on the binarized outcome.
    pub binned: Option<bool>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub pns_coupling: Option<PnsCoupling>,
    pub em_runs: Option<usize>,
    pub em_maxiter: Option<usize>,
    pub em_concentration: Option<f64>,
}

impl RunSpec {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: RunSpec) -> RunSpec {
        RunSpec {
            scenario: over.scenario.or(self.scenario),
            n_sims: over.n_sims.or(self.n_sims),
            n_units: over.n_units.or(self.n_units),
            seed: over.seed.or(self.seed),
            algorithms: over.algorithms.or(self.algorithms),
            theta: over.theta.or(self.theta),
            levels: over.levels.or(self.levels),
            binned: over.binned.or(self.binned),
            out: over.out.or(self.out),
            jobs: over.jobs.or(self.jobs),
            pns_coupling: over.pns_coupling.or(self.pns_coupling),
            em_runs: over.em_runs.or(self.em_runs),
            em_maxiter: over.em_maxiter.or(self.em_maxiter),
            em_concentration: over.em_concentration.or(self.em_concentration),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn simulation(&self) -> CliResult<SimulationConfig> {
        let name = self
            .scenario
            .as_deref()
            .ok_or_else(|| CliError::Spec("no scenario given".into()))?;
        let scenario: Scenario = name.parse()?;
        let cfg = SimulationConfig {
            scenario,
            n_sims: self.n_sims.unwrap_or(DEFAULT_N_SIMS),
            n_units: self.n_units.unwrap_or(DEFAULT_N_UNITS),
            master_seed: self.seed.unwrap_or(0),
            pns_coupling: self.pns_coupling.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Simulation indices selected by `levels`.
    pub fn indices(&self, cfg: &SimulationConfig) -> CliResult<Vec<usize>> {
        let all = 1..=cfg.n_sims;
        let Some(levels) = &self.levels else {
            return Ok(all.collect());
        };
        if cfg.scenario != Scenario::BinaryEntropyConf {
            return Err(CliError::Spec(format!(
                "entropy levels only apply to BinaryEntropyConf, not {}",
                cfg.scenario
            )));
        }
        for &h in levels {
            if !(0..10).any(|l| (level_entropy(l) - h).abs() < 1e-9) {
                return Err(CliError::Spec(format!("{h} is not an entropy level (0.05, 0.15, ..., 0.95)")));
            }
        }
        Ok(all
            .filter(|&j| {
                let h = level_entropy(entropy_level(j, cfg.n_sims).0);
                levels.iter().any(|&l| (l - h).abs() < 1e-9)
            })
            .collect())
    }

    /// Parses and checks the requested algorithms against the scenario.
    pub fn algorithms(&self, scenario: Scenario) -> CliResult<Vec<Algorithm>> {
        let theta = self.theta.unwrap_or(DEFAULT_THETA);
        if !(theta >= 0.0) {
            return Err(CliError::Spec(format!("theta {theta} must be >= 0")));
        }
        let mut algos = match &self.algorithms {
            None => default_algorithms(scenario),
            Some(names) => names
                .iter()
                .map(|n| Algorithm::parse(n.trim(), theta))
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::Spec)?,
        };
        if self.binned == Some(true) {
            for a in &mut algos {
                a.binned = true;
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut problems = Vec::new();
        for a in &algos {
            if !seen.insert(a.to_string()) {
                problems.push(format!("{a}: listed twice"));
            }
            problems.extend(a.incompatibility(scenario));
        }
        if !problems.is_empty() {
            return Err(CliError::Spec(format!(
                "incompatible algorithms:\n  {}",
                problems.join("\n  ")
            )));
        }
        Ok(algos)
    }

    pub fn em_config(&self) -> CliResult<EmConfig> {
        let d = EmConfig::default();
        let cfg = EmConfig {
            runs: self.em_runs.unwrap_or(d.runs),
            maxiter: self.em_maxiter.unwrap_or(d.maxiter),
            init_concentration: self.em_concentration.unwrap_or(d.init_concentration),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
