//! The `simulate`, `bound`, `report` and `run` commands.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use causal_bounds::em_bounds::EmConfig;
use causal_bounds::metrics::{
    best_algorithm, classify, evaluate, features, AlgorithmMetrics, Classification, MetricsReport, RunOutcome,
};
use causal_bounds::scenarios::{binarize, generate, PnsCoupling, Scenario, SimulationConfig, Truth};
use causal_bounds::seed::derive_seed;
use causal_bounds::{BoundResult, Dataset, Interval, Query};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{execute, Algorithm, Method};
use crate::error::{CliError, CliResult};
use crate::spec::RunSpec;

pub const MANIFEST: &str = "manifest.json";
pub const BOUNDS: &str = "bounds.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEntry {
    pub j: usize,
    pub seed: u64,
    pub data: String,
    pub truth: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: Scenario,
    #[serde(rename = "N")]
    pub n_sims: usize,
    #[serde(rename = "n")]
    pub n_units: usize,
    pub master_seed: u64,
    pub pns_coupling: PnsCoupling,
    pub levels: Option<Vec<f64>>,
    pub simulations: Vec<SimEntry>,
}

impl Manifest {
    pub fn read(out: &Path) -> CliResult<Self> {
        let path = out.join(MANIFEST);
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn config(&self) -> SimulationConfig {
        SimulationConfig {
            scenario: self.scenario,
            n_sims: self.n_sims,
            n_units: self.n_units,
            master_seed: self.master_seed,
            pns_coupling: self.pns_coupling,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn build_pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Spec("--jobs must be at least 1".into()));
        }
        b = b.num_threads(j);
    }
    b.build().map_err(|e| CliError::Spec(e.to_string()))
}

/// Generates the datasets and truth sidecars and writes the manifest.
pub fn simulate(spec: &RunSpec) -> CliResult<Manifest> {
    let cfg = spec.simulation()?;
    let indices = spec.indices(&cfg)?;
    let out = spec.out_dir();
    let data_dir = out.join("data");
    fs::create_dir_all(&data_dir).map_err(|e| io_err(&data_dir, e))?;
    let pool = build_pool(spec.jobs)?;
    let entries: Vec<SimEntry> = pool.install(|| {
        indices
            .par_iter()
            .map(|&j| -> CliResult<SimEntry> {
                let rec = generate(j, &cfg)?;
                let data = format!("data/sim_{j:05}.csv");
                let truth = format!("data/sim_{j:05}.truth.json");
                rec.dataset.write_csv_file(out.join(&data)).map_err(|e| io_err(&out.join(&data), e))?;
                let json = serde_json::to_vec_pretty(&rec.truth())?;
                write_file(&out.join(&truth), &json)?;
                Ok(SimEntry { j, seed: cfg.sim_seed(j), data, truth })
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let manifest = Manifest {
        scenario: cfg.scenario,
        n_sims: cfg.n_sims,
        n_units: cfg.n_units,
        master_seed: cfg.master_seed,
        pns_coupling: cfg.pns_coupling,
        levels: spec.levels.clone(),
        simulations: entries,
    };
    write_file(&out.join(MANIFEST), &serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

/// One line of `bounds.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub j: usize,
    pub algorithm: String,
    pub query: Query,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub status: String,
    pub reason: String,
    pub theta: Option<f64>,
    pub runtime_s: f64,
}

impl BoundRow {
    pub fn result(&self) -> BoundResult {
        match (self.lower, self.upper) {
            (Some(lower), Some(upper)) if self.status == "ok" => BoundResult::Bounds(Interval { lower, upper }),
            _ => BoundResult::Failure(self.reason.clone()),
        }
    }
}

fn load_sim(out: &Path, e: &SimEntry) -> CliResult<(Dataset, Truth)> {
    let dp = out.join(&e.data);
    let d = Dataset::read_csv_file(&dp).map_err(|err| io_err(&dp, err))?;
    let tp = out.join(&e.truth);
    let text = fs::read_to_string(&tp).map_err(|err| io_err(&tp, err))?;
    let truth: Truth = serde_json::from_str(&text).map_err(|err| io_err(&tp, err))?;
    Ok((d, truth))
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a.
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed of one algorithm's run on simulation `j`.
pub fn run_seed(cfg: &SimulationConfig, j: usize, algo: &Algorithm) -> u64 {
    derive_seed(&[cfg.master_seed, cfg.scenario.id(), j as u64, name_hash(&algo.to_string())])
}

fn run_algorithms(
    out: &Path,
    manifest: &Manifest,
    algos: &[Algorithm],
    em: &EmConfig,
    jobs: Option<usize>,
) -> CliResult<Vec<BoundRow>> {
    let cfg = manifest.config();
    let pool = build_pool(jobs)?;
    let rows: Vec<Vec<BoundRow>> = pool.install(|| {
        manifest
            .simulations
            .par_iter()
            .map(|e| -> CliResult<Vec<BoundRow>> {
                let (d, truth) = load_sim(out, e)?;
                Ok(algos
                    .iter()
                    .map(|a| {
                        let start = Instant::now();
                        let ex = execute(a, &d, &truth, run_seed(&cfg, e.j, a), em);
                        let runtime_s = start.elapsed().as_secs_f64();
                        let (lower, upper, status, reason) = match &ex.result {
                            BoundResult::Bounds(b) => (
                                Some(b.lower),
                                Some(b.upper),
                                "ok",
                                if ex.degenerate { "outside ceiling; replaced by it".to_string() } else { String::new() },
                            ),
                            BoundResult::Failure(r) => (None, None, "failure", r.clone()),
                        };
                        BoundRow {
                            j: e.j,
                            algorithm: a.to_string(),
                            query: a.query,
                            lower,
                            upper,
                            status: status.into(),
                            reason,
                            theta: ex.theta,
                            runtime_s,
                        }
                    })
                    .collect())
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    Ok(rows.into_iter().flatten().collect())
}

/// Runs the algorithms on every simulated dataset and writes `bounds.csv`.
pub fn bound(spec: &RunSpec) -> CliResult<Vec<BoundRow>> {
    let out = spec.out_dir();
    let manifest = Manifest::read(&out)?;
    if let Some(s) = &spec.scenario {
        let requested: Scenario = s.parse()?;
        if requested != manifest.scenario {
            return Err(CliError::Spec(format!(
                "requested scenario {requested} but {} holds {}",
                out.display(),
                manifest.scenario
            )));
        }
    }
    let algos = spec.algorithms(manifest.scenario)?;
    let rows = run_algorithms(&out, &manifest, &algos, &spec.em_config()?, spec.jobs)?;
    let path = out.join(BOUNDS);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    for r in &rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["j", "algorithm", "query", "lower", "upper", "status", "reason", "theta", "runtime_s"])?;
    }
    w.flush()?;
    Ok(rows)
}

pub fn read_bounds(out: &Path) -> CliResult<Vec<BoundRow>> {
    let path = out.join(BOUNDS);
    let mut r = csv::Reader::from_path(&path).map_err(|e| io_err(&path, e))?;
    r.deserialize().map(|row| row.map_err(|e| io_err(&path, e))).collect()
}

fn truth_value(t: &Truth, q: Query) -> Option<f64> {
    match q {
        Query::Ate => Some(t.true_ate),
        Query::Pns => t.true_pns,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), |v| v.to_string())
}

fn fmt_md(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), |v| format!("{v:.2}"))
}

const METRIC_HEADER: [&str; 9] = [
    "runs",
    "failed",
    "invalid",
    "failure_rate",
    "invalid_rate",
    "bound_width",
    "net_bound_width",
    "invalid_delta",
    "algorithm",
];

fn metric_fields(m: &AlgorithmMetrics) -> Vec<String> {
    vec![
        m.runs.to_string(),
        m.failed.to_string(),
        m.invalid.to_string(),
        m.failure_rate.to_string(),
        fmt_opt(m.invalid_rate),
        m.bound_width.to_string(),
        fmt_opt(m.net_bound_width),
        fmt_opt(m.invalid_delta),
    ]
}

fn markdown(reports: &[MetricsReport]) -> String {
    let mut s = String::new();
    for rep in reports {
        s.push_str(&format!("## {}\n\n", rep.query));
        s.push_str("| Algorithm | Fail Rate | Invalid Rate | Net Width | Bound Width | Invalid Δ |\n");
        s.push_str("|---|---:|---:|---:|---:|---:|\n");
        for m in &rep.rows {
            s.push_str(&format!(
                "| {} | {:.2} | {} | {} | {:.2} | {} |\n",
                m.algorithm,
                m.failure_rate,
                fmt_md(m.invalid_rate),
                fmt_md(m.net_bound_width),
                m.bound_width,
                fmt_md(m.invalid_delta)
            ));
        }
        s.push('\n');
    }
    s
}

/// Everything `report` computes.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub metrics: Vec<MetricsReport>,
    /// `(j, query, best algorithm)`.
    pub best: Vec<(usize, Query, Option<String>)>,
}

/// Evaluates `bounds.csv` against the truths and writes the report files.
pub fn report(spec: &RunSpec) -> CliResult<Report> {
    let out = spec.out_dir();
    let manifest = Manifest::read(&out)?;
    let rows = read_bounds(&out)?;
    let entries: BTreeMap<usize, &SimEntry> = manifest.simulations.iter().map(|e| (e.j, e)).collect();
    let mut sims: BTreeMap<usize, (Dataset, Truth)> = BTreeMap::new();
    for e in &manifest.simulations {
        sims.insert(e.j, load_sim(&out, e)?);
    }
    if let Some(r) = rows.iter().find(|r| !entries.contains_key(&r.j)) {
        return Err(CliError::Spec(format!(
            "{BOUNDS} refers to simulation {} absent from the manifest",
            r.j
        )));
    }

    let mut by_query: BTreeMap<&str, (Query, Vec<RunOutcome>)> = BTreeMap::new();
    for r in &rows {
        let truth = truth_value(&sims[&r.j].1, r.query).ok_or_else(|| {
            CliError::Spec(format!("simulation {} has no {} ground truth", r.j, r.query))
        })?;
        by_query
            .entry(r.query.as_str())
            .or_insert_with(|| (r.query, Vec::new()))
            .1
            .push(RunOutcome { j: r.j, algorithm: r.algorithm.clone(), result: r.result(), truth });
    }
    let mut reports = Vec::new();
    for (q, runs) in by_query.values() {
        reports.push(evaluate(runs, *q)?);
    }

    let path = out.join("metrics.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    let mut header = vec!["query", "algorithm"];
    header.extend(&METRIC_HEADER[..8]);
    w.write_record(&header)?;
    for rep in &reports {
        for m in &rep.rows {
            let mut rec = vec![rep.query.to_string(), m.algorithm.clone()];
            rec.extend(metric_fields(m));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    write_file(&out.join("metrics.md"), markdown(&reports).as_bytes())?;

    // Best algorithm and observable features per simulation.
    let path = out.join("best.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(["j", "query", "best", "h_x", "h_y", "h_z", "i_zx", "i_zy", "i_xy"])?;
    let mut best = Vec::new();
    for (q, runs) in by_query.values() {
        let mut per_sim: BTreeMap<usize, Vec<RunOutcome>> = BTreeMap::new();
        for r in runs {
            per_sim.entry(r.j).or_default().push(r.clone());
        }
        for (j, list) in per_sim {
            let b = best_algorithm(&list, *q);
            let d = &sims[&j].0;
            let f = if d.has_binary_outcome() { features(d) } else { features(&binarize(d, 0.5)) }?;
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
            w.write_record([
                j.to_string(),
                q.to_string(),
                b.clone().unwrap_or_default(),
                f.h_x.to_string(),
                f.h_y.to_string(),
                opt(f.h_z),
                opt(f.i_zx),
                opt(f.i_zy),
                f.i_xy.to_string(),
            ])?;
            best.push((j, *q, b));
        }
    }
    w.flush()?;

    if manifest.scenario == Scenario::BinaryEntropyConf {
        write_level_metrics(&out, &by_query, &sims)?;
        write_underspec(&out, &rows, &sims)?;
    }
    Ok(Report { metrics: reports, best })
}

fn write_level_metrics(
    out: &Path,
    by_query: &BTreeMap<&str, (Query, Vec<RunOutcome>)>,
    sims: &BTreeMap<usize, (Dataset, Truth)>,
) -> CliResult<()> {
    let path = out.join("metrics_by_level.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    let mut header = vec!["h_target", "query", "algorithm"];
    header.extend(&METRIC_HEADER[..8]);
    w.write_record(&header)?;
    for (q, runs) in by_query.values() {
        let mut levels: BTreeMap<String, Vec<RunOutcome>> = BTreeMap::new();
        for r in runs {
            let h = sims[&r.j].1.params.h_target.unwrap_or(f64::NAN);
            levels.entry(format!("{h:.2}")).or_default().push(r.clone());
        }
        for (h, list) in levels {
            for m in evaluate(&list, *q)?.rows {
                let mut rec = vec![h.clone(), q.to_string(), m.algorithm.clone()];
                rec.extend(metric_fields(&m));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-run θ error against the true confounder entropy, with validity.
fn write_underspec(out: &Path, rows: &[BoundRow], sims: &BTreeMap<usize, (Dataset, Truth)>) -> CliResult<()> {
    let path = out.join("underspec.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(["j", "algorithm", "query", "theta", "h_u", "theta_error", "status", "invalid"])?;
    for r in rows {
        let is_entropy = Algorithm::parse(&r.algorithm, 0.0)
            .is_ok_and(|a| matches!(a.method, Method::Entropy(_)));
        let (Some(theta), true) = (r.theta, is_entropy) else { continue };
        let truth = &sims[&r.j].1;
        let Some(h_u) = truth.h_u else { continue };
        let invalid = match (r.result(), truth_value(truth, r.query)) {
            (res @ BoundResult::Bounds(_), Some(t)) => {
                if classify(&res, t, r.query) == Classification::Invalid {
                    "1"
                } else {
                    "0"
                }
            }
            _ => "",
        };
        w.write_record([
            r.j.to_string(),
            r.algorithm.clone(),
            r.query.to_string(),
            theta.to_string(),
            h_u.to_string(),
            (h_u - theta).to_string(),
            r.status.clone(),
            invalid.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `simulate`, then `bound`, then `report`.
pub fn run(spec: &RunSpec) -> CliResult<Report> {
    // Reject bad algorithm requests before writing anything.
    let cfg = spec.simulation()?;
    spec.algorithms(cfg.scenario)?;
    spec.em_config()?;
    simulate(spec)?;
    bound(spec)?;
    report(spec)
}

