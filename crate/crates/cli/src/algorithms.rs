//! Algorithm names, their applicability to scenarios, and their execution
//! on one dataset.

use std::fmt;

use causal_bounds::closedform::{manski_ate, ols_ate_ci, tianpearl_pns, tsls_ate_ci, ConfidenceLevel};
use causal_bounds::em_bounds::{emcc_bounds, EmConfig, EmData};
use causal_bounds::entropy_bounds::{entropy_ate, entropy_pns, Theta};
use causal_bounds::lp_bounds::{conf_lp_bounds, iv_lp_bounds, zhangbareinboim_ate, ZbMode};
use causal_bounds::scenarios::{binarize, Scenario, Truth};
use causal_bounds::{
    clip_to_ceiling, empirical_binary_joint, empirical_iv_joint, BoundResult, Dataset, Interval,
    Query,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Suffix marking an algorithm run on a binarized outcome.
pub const BINNED_SUFFIX: &str = "--binned";

/// Default fixed entropy cap.
pub const DEFAULT_THETA: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaChoice {
    Fixed(f64),
    True,
    Random,
    Underspecify,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Manski,
    TianPearl,
    Ols(f64),
    Tsls(f64),
    Autobound,
    Zaffalon,
    Entropy(ThetaChoice),
    ZhangBareinboim,
}

impl Method {
    fn needs_binary_outcome(self) -> bool {
        !matches!(self, Method::Ols(_) | Method::Tsls(_) | Method::ZhangBareinboim)
    }

    fn supports(self, q: Query) -> bool {
        match self {
            Method::Manski | Method::Ols(_) | Method::Tsls(_) | Method::ZhangBareinboim => q == Query::Ate,
            Method::TianPearl => q == Query::Pns,
            Method::Autobound | Method::Zaffalon | Method::Entropy(_) => true,
        }
    }
}

/// A named bounding algorithm, e.g. `ATE_entropybounds-0.10--binned`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Algorithm {
    pub query: Query,
    pub method: Method,
    pub binned: bool,
}

fn fmt_param(v: f64) -> String {
    if (v * 100.0 - (v * 100.0).round()).abs() < 1e-9 {
        format!("{v:.2}")
    } else {
        format!("{v}")
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = match self.method {
            Method::Manski => "manski".to_string(),
            Method::TianPearl => "tianpearl".to_string(),
            Method::Ols(l) => format!("OLS-{}", fmt_param(l)),
            Method::Tsls(l) => format!("2SLS-{}", fmt_param(l)),
            Method::Autobound => "autobound".to_string(),
            Method::Zaffalon => "zaffalonbounds".to_string(),
            Method::Entropy(t) => format!(
                "entropybounds-{}",
                match t {
                    ThetaChoice::Fixed(v) => fmt_param(v),
                    ThetaChoice::True => "trueTheta".into(),
                    ThetaChoice::Random => "randomTheta".into(),
                    ThetaChoice::Underspecify => "underspecifyTheta".into(),
                }
            ),
            Method::ZhangBareinboim => "zhangbareinboim".to_string(),
        };
        write!(f, "{}_{body}", self.query)?;
        if self.binned {
            f.write_str(BINNED_SUFFIX)?;
        }
        Ok(())
    }
}

impl Algorithm {
    /// Parses a name; a bare `entropybounds` takes `default_theta`.
    pub fn parse(name: &str, default_theta: f64) -> Result<Self, String> {
        let bad = || format!("unknown algorithm `{name}`");
        let (rest, binned) = match name.strip_suffix(BINNED_SUFFIX) {
            Some(r) => (r, true),
            None => (name, false),
        };
        let (q, body) = rest.split_once('_').ok_or_else(bad)?;
        let query: Query = q.parse().map_err(|_| bad())?;
        let level = |s: &str| -> Result<f64, String> {
            let v: f64 = s.parse().map_err(|_| bad())?;
            ConfidenceLevel::new(v).map_err(|e| format!("`{name}`: {e}"))?;
            Ok(v)
        };
        let method = match body {
            "manski" => Method::Manski,
            "tianpearl" => Method::TianPearl,
            "autobound" => Method::Autobound,
            "zaffalonbounds" => Method::Zaffalon,
            "zhangbareinboim" => Method::ZhangBareinboim,
            "entropybounds" => Method::Entropy(ThetaChoice::Fixed(default_theta)),
            _ => {
                if let Some(l) = body.strip_prefix("OLS-") {
                    Method::Ols(level(l)?)
                } else if let Some(l) = body.strip_prefix("2SLS-") {
                    Method::Tsls(level(l)?)
                } else if let Some(t) = body.strip_prefix("entropybounds-") {
                    Method::Entropy(match t {
                        "trueTheta" => ThetaChoice::True,
                        "randomTheta" => ThetaChoice::Random,
                        "underspecifyTheta" => ThetaChoice::Underspecify,
                        v => {
                            let v: f64 = v.parse().map_err(|_| bad())?;
                            if !(v >= 0.0) {
                                return Err(format!("`{name}`: theta must be >= 0"));
                            }
                            ThetaChoice::Fixed(v)
                        }
                    })
                } else {
                    return Err(bad());
                }
            }
        };
        Ok(Algorithm { query, method, binned })
    }

    /// Why this algorithm cannot run on `scenario`, if it cannot.
    pub fn incompatibility(&self, scenario: Scenario) -> Option<String> {
        let name = self.to_string();
        if !self.method.supports(self.query) {
            return Some(format!("{name}: method does not bound the {}", self.query));
        }
        if self.binned && scenario.has_binary_outcome() {
            return Some(format!("{name}: {scenario} already has a binary outcome"));
        }
        if self.method.needs_binary_outcome() && !scenario.has_binary_outcome() && !self.binned {
            return Some(format!("{name}: continuous outcome requires binarization (`{BINNED_SUFFIX}`)"));
        }
        if self.query == Query::Pns && !scenario.has_binary_outcome() {
            return Some(format!("{name}: {scenario} has no PNS ground truth"));
        }
        if matches!(self.method, Method::Tsls(_) | Method::ZhangBareinboim) && !scenario.has_instrument() {
            return Some(format!("{name}: requires an instrument, {scenario} has none"));
        }
        if matches!(self.method, Method::Entropy(ThetaChoice::True | ThetaChoice::Underspecify))
            && !scenario.has_binary_outcome()
        {
            return Some(format!("{name}: needs the entropy of a binary confounder"));
        }
        None
    }
}

/// The algorithm suite run when none is requested.
pub fn default_algorithms(scenario: Scenario) -> Vec<Algorithm> {
    let names: &[&str] = match scenario {
        Scenario::BinaryConf => &[
            "ATE_manski",
            "ATE_OLS-0.95",
            "ATE_autobound",
            "ATE_zaffalonbounds",
            "ATE_entropybounds-0.10",
            "ATE_entropybounds-trueTheta",
            "ATE_entropybounds-randomTheta",
            "PNS_tianpearl",
            "PNS_autobound",
            "PNS_zaffalonbounds",
            "PNS_entropybounds-0.10",
            "PNS_entropybounds-trueTheta",
            "PNS_entropybounds-randomTheta",
        ],
        Scenario::BinaryIV => &[
            "ATE_manski",
            "ATE_OLS-0.95",
            "ATE_2SLS-0.95",
            "ATE_autobound",
            "ATE_zaffalonbounds",
            "ATE_entropybounds-0.10",
            "ATE_entropybounds-trueTheta",
            "ATE_entropybounds-randomTheta",
            "ATE_zhangbareinboim",
            "PNS_tianpearl",
            "PNS_autobound",
            "PNS_zaffalonbounds",
            "PNS_entropybounds-0.10",
            "PNS_entropybounds-trueTheta",
            "PNS_entropybounds-randomTheta",
        ],
        Scenario::ContConf => &[
            "ATE_OLS-0.95",
            "ATE_manski--binned",
            "ATE_autobound--binned",
            "ATE_zaffalonbounds--binned",
            "ATE_entropybounds-0.10--binned",
            "ATE_entropybounds-randomTheta--binned",
        ],
        Scenario::ContIV => &[
            "ATE_OLS-0.95",
            "ATE_2SLS-0.95",
            "ATE_zhangbareinboim",
            "ATE_manski--binned",
            "ATE_autobound--binned",
            "ATE_zaffalonbounds--binned",
            "ATE_entropybounds-0.10--binned",
            "ATE_entropybounds-randomTheta--binned",
        ],
        Scenario::BinaryEntropyConf => &[
            "ATE_manski",
            "ATE_entropybounds-trueTheta",
            "ATE_entropybounds-underspecifyTheta",
            "PNS_tianpearl",
            "PNS_entropybounds-trueTheta",
            "PNS_entropybounds-underspecifyTheta",
        ],
    };
    names
        .iter()
        .map(|n| Algorithm::parse(n, DEFAULT_THETA).expect("default names parse"))
        .collect()
}

/// What one algorithm returned on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub result: BoundResult,
    /// Clipping replaced an out-of-range bound by the full ceiling.
    pub degenerate: bool,
    pub theta: Option<f64>,
}

fn resolve_theta(choice: ThetaChoice, truth: &Truth, seed: u64) -> causal_bounds::Result<Theta> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h_u = || {
        truth
            .h_u
            .ok_or_else(|| causal_bounds::Error::InvalidInput("confounder entropy unknown".into()))
    };
    match choice {
        ThetaChoice::Fixed(v) => Theta::fixed(v),
        ThetaChoice::True => Ok(Theta {
            value: h_u()?,
            source: causal_bounds::entropy_bounds::ThetaSource::TrueTheta,
        }),
        ThetaChoice::Random => Ok(Theta::random(&mut rng)),
        ThetaChoice::Underspecify => Ok(Theta::underspecify(h_u()?, &mut rng)),
    }
}

/// Runs `algo` on `raw` (binarized first when the algorithm is binned).
/// `seed` drives every random choice of the run.
pub fn execute(algo: &Algorithm, raw: &Dataset, truth: &Truth, seed: u64, em: &EmConfig) -> Execution {
    let binned;
    let d = if algo.binned {
        binned = binarize(raw, 0.5);
        &binned
    } else {
        raw
    };
    let q = algo.query;
    let mut theta = None;
    let bound: causal_bounds::Result<Interval> = (|| match algo.method {
        Method::Manski => Ok(manski_ate(&empirical_binary_joint(d)?)),
        Method::TianPearl => Ok(tianpearl_pns(&empirical_binary_joint(d)?)),
        Method::Ols(l) => ols_ate_ci(d, ConfidenceLevel::new(l)?),
        Method::Tsls(l) => tsls_ate_ci(d, ConfidenceLevel::new(l)?),
        Method::Autobound => {
            if d.has_instrument() {
                iv_lp_bounds(&empirical_iv_joint(d)?, q)
            } else {
                conf_lp_bounds(&empirical_binary_joint(d)?, q)
            }
        }
        Method::Zaffalon => {
            let data = if d.has_instrument() {
                EmData::Iv(empirical_iv_joint(d)?)
            } else {
                EmData::Conf(empirical_binary_joint(d)?)
            };
            emcc_bounds(&data, q, &EmConfig { seed, ..*em })
        }
        Method::Entropy(choice) => {
            let t = resolve_theta(choice, truth, seed)?;
            theta = Some(t.value);
            let j = empirical_binary_joint(d)?;
            match q {
                Query::Ate => entropy_ate(&j, t.value),
                Query::Pns => entropy_pns(&j, t.value),
            }
        }
        Method::ZhangBareinboim => zhangbareinboim_ate(d, ZbMode::default()),
    })();
    match bound {
        Ok(b) => {
            let c = clip_to_ceiling(b, q);
            Execution {
                result: BoundResult::Bounds(c.interval),
                degenerate: c.degenerate,
                theta,
            }
        }
        Err(e) => Execution {
            result: BoundResult::Failure(e.to_string()),
            degenerate: false,
            theta,
        },
    }
}
