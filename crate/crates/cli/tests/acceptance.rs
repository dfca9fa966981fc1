//! Acceptance checks A1–A10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use causal_bounds::closedform::{manski_ate, tianpearl_pns};
use causal_bounds::em_bounds::{emcc_bounds, EmConfig, EmData};
use causal_bounds::entropy_bounds::{entropy_ate, entropy_pns};
use causal_bounds::lp_bounds::{conf_lp_bounds, zhangbareinboim_ate, ZbMode};
use causal_bounds::metrics::{best_algorithm, evaluate, RunOutcome};
use causal_bounds::scenarios::Truth;
use causal_bounds::{BinaryJoint, BoundResult, Dataset, Interval, Query};
use common::oracle::ate_grid;
use common::random_joint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within_time(start: Instant, limit: Duration, msg: String) -> Check {
    let t = start.elapsed();
    ensure(t < limit, format!("{msg}; {:.2}s (limit {}s)", t.as_secs_f64(), limit.as_secs()))
}

fn cbounds(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cbounds"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("cbounds {args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn csv_rows(path: &Path) -> Result<Vec<BTreeMap<String, String>>, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            Ok(header.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        })
        .collect()
}

fn num(row: &BTreeMap<String, String>, col: &str) -> Result<f64, String> {
    row[col].parse().map_err(|_| format!("{col} = {:?}", row[col]))
}

fn metric(rows: &[BTreeMap<String, String>], algo: &str, col: &str) -> Result<f64, String> {
    let row = rows
        .iter()
        .find(|r| r["algorithm"] == algo)
        .ok_or_else(|| format!("no metrics row for {algo}"))?;
    num(row, col)
}

fn gap(a: Interval, b: Interval) -> f64 {
    (a.lower - b.lower).abs().max((a.upper - b.upper).abs())
}

fn a1() -> Check {
    let start = Instant::now();
    let j = BinaryJoint::from_cells(0.3, 0.2, 0.1, 0.4).map_err(|e| e.to_string())?;
    let ate = Interval { lower: -0.3, upper: 0.7 };
    let pns = Interval { lower: 0.0, upper: 0.7 };
    let lp_ate = conf_lp_bounds(&j, Query::Ate).map_err(|e| e.to_string())?;
    let lp_pns = conf_lp_bounds(&j, Query::Pns).map_err(|e| e.to_string())?;
    let worst = [
        gap(lp_ate, ate),
        gap(manski_ate(&j), ate),
        gap(lp_pns, pns),
        gap(tianpearl_pns(&j), pns),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    ensure(worst <= 1e-9, format!("ATE LP {lp_ate}, PNS LP {lp_pns}, max gap {worst:.1e}"))
        .and_then(|m| within_time(start, Duration::from_secs(1), m))
}

fn a2() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    let (mut ate_gap, mut pns_gap) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let j = random_joint(&mut rng, 0.0);
        let lp = conf_lp_bounds(&j, Query::Ate).map_err(|e| e.to_string())?;
        ate_gap = ate_gap.max(gap(lp, manski_ate(&j)));
        let lp = conf_lp_bounds(&j, Query::Pns).map_err(|e| e.to_string())?;
        pns_gap = pns_gap.max(gap(lp, tianpearl_pns(&j)));
    }
    ensure(
        ate_gap <= 1e-7 && pns_gap <= 1e-7,
        format!("max gap ATE {ate_gap:.1e}, PNS {pns_gap:.1e}"),
    )
    .and_then(|m| within_time(start, Duration::from_secs(10), m))
}

fn a3() -> Check {
    let start = Instant::now();
    let thetas = [0.0, 0.1, 0.2, 0.5, 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    let (mut monotone, mut zero_gap, mut one_gap, mut grid_gap) = (true, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let j = random_joint(&mut rng, 0.02);
        for q in [Query::Ate, Query::Pns] {
            let f = match q {
                Query::Ate => entropy_ate,
                Query::Pns => entropy_pns,
            };
            let b: Vec<Interval> = thetas.iter().map(|&t| f(&j, t)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            monotone &= b.windows(2).all(|w| w[1].width() >= w[0].width() - 1e-9);
            let sharp = conf_lp_bounds(&j, q).map_err(|e| e.to_string())?;
            one_gap = one_gap.max(gap(b[4], sharp));
        }
        let p1 = j.p_y1_given(1).unwrap();
        let p0 = j.p_y1_given(0).unwrap();
        zero_gap = zero_gap.max(gap(entropy_ate(&j, 0.0).unwrap(), Interval::point(p1 - p0)));
        for theta in [0.1, 0.2, 0.5] {
            let (lo, hi) = ate_grid(j.p, theta, 200_000);
            grid_gap = grid_gap.max(gap(entropy_ate(&j, theta).unwrap(), Interval { lower: lo, upper: hi }));
        }
    }
    ensure(
        monotone && zero_gap <= 1e-4 && one_gap <= 1e-4 && grid_gap <= 2e-3,
        format!(
            "monotone {monotone}, theta=0 gap {zero_gap:.1e}, theta=1 gap {one_gap:.1e}, grid gap {grid_gap:.1e}"
        ),
    )
    .and_then(|m| within_time(start, Duration::from_secs(120), m))
}

fn a4() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4);
    let (mut escape, mut covered) = (0.0f64, 0.0);
    for k in 0..20 {
        let j = random_joint(&mut rng, 0.01);
        let cfg = EmConfig { runs: 30, maxiter: 100, seed: k, ..EmConfig::default() };
        let em = emcc_bounds(&EmData::Conf(j), Query::Ate, &cfg).map_err(|e| e.to_string())?;
        let sharp = conf_lp_bounds(&j, Query::Ate).map_err(|e| e.to_string())?;
        escape = escape.max(sharp.lower - em.lower).max(em.upper - sharp.upper);
        covered += em.width() / sharp.width() / 20.0;
    }
    ensure(
        escape <= 1e-6 && covered >= 0.9,
        format!("max escape {escape:.1e}, mean covered fraction {covered:.3}"),
    )
    .and_then(|m| within_time(start, Duration::from_secs(300), m))
}

fn a5(tmp: &Path) -> Check {
    let start = Instant::now();
    let out = tmp.join("a5");
    cbounds(&[
        "run", "--scenario", "BinaryConf", "--N", "200", "--n", "500", "--seed", "5",
        "--algos", "ATE_manski,PNS_tianpearl", "--out", out.to_str().unwrap(),
    ])?;
    let rows = csv_rows(&out.join("metrics.csv"))?;
    let m_inv = metric(&rows, "ATE_manski", "invalid_rate")?;
    let m_net = metric(&rows, "ATE_manski", "net_bound_width")?;
    let t_inv = metric(&rows, "PNS_tianpearl", "invalid_rate")?;
    let t_net = metric(&rows, "PNS_tianpearl", "net_bound_width")?;
    ensure(
        m_inv <= 2.0 && t_inv <= 2.0 && (m_net - 50.0).abs() <= 0.5 && (t_net - 51.6).abs() <= 3.0,
        format!("manski invalid {m_inv:.2}% net {m_net:.2}; tianpearl invalid {t_inv:.2}% net {t_net:.2}"),
    )
    .and_then(|m| within_time(start, Duration::from_secs(900), m))
}

fn a6(tmp: &Path) -> Check {
    let out = tmp.join("a6");
    cbounds(&[
        "run", "--scenario", "BinaryEntropyConf", "--N", "400", "--n", "500", "--seed", "6",
        "--level", "0.05,0.15", "--algos", "ATE_manski,ATE_entropybounds-trueTheta",
        "--out", out.to_str().unwrap(),
    ])?;
    let rows = csv_rows(&out.join("metrics_by_level.csv"))?;
    let mut ok = true;
    let mut parts = Vec::new();
    for level in ["0.05", "0.15"] {
        let at: Vec<_> = rows.iter().filter(|r| r["h_target"] == level).cloned().collect();
        let runs = metric(&at, "ATE_manski", "runs")?;
        let ent = metric(&at, "ATE_entropybounds-trueTheta", "net_bound_width")?;
        let man = metric(&at, "ATE_manski", "net_bound_width")?;
        ok &= runs == 40.0 && ent < 45.0 && (man - 50.0).abs() <= 0.5;
        parts.push(format!("H={level}: {runs} sims, trueTheta net {ent:.2}, manski net {man:.2}"));
    }
    ensure(ok, parts.join("; "))
}

fn a7(tmp: &Path) -> Check {
    let out = tmp.join("a7");
    cbounds(&[
        "run", "--scenario", "BinaryEntropyConf", "--N", "400", "--n", "500", "--seed", "7",
        "--algos", "ATE_entropybounds-underspecifyTheta",
        "--out", out.to_str().unwrap(),
    ])?;
    let pairs: Vec<(f64, f64)> = csv_rows(&out.join("underspec.csv"))?
        .iter()
        .filter(|r| !r["invalid"].is_empty())
        .map(|r| Ok((num(r, "invalid")?, num(r, "theta_error")?)))
        .collect::<Result<_, String>>()?;
    let n = pairs.len() as f64;
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    let r = sxy / (sxx * syy).sqrt();
    let t = r * ((n - 2.0) / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 2.0).map_err(|e| e.to_string())?;
    let p = 1.0 - dist.cdf(t);
    ensure(
        r > 0.0 && p < 0.05,
        format!("{} runs, invalid rate {:.1}%, point-biserial r = {r:.3}, one-sided p = {p:.2e}", pairs.len(), 100.0 * mx),
    )
}

fn a8(tmp: &Path) -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA8);
    let z: Vec<u8> = (0..500).map(|_| rng.random_range(0..2)).collect();
    let y: Vec<f64> = z.iter().map(|&z| (0.3 + 0.4 * z as f64 + 0.2 * rng.random::<f64>()).min(1.0)).collect();
    let d = Dataset::new(Some(z.clone()), z, y).map_err(|e| e.to_string())?;
    let zb = zhangbareinboim_ate(&d, ZbMode::default()).map_err(|e| e.to_string())?;

    let out = tmp.join("a8");
    cbounds(&[
        "run", "--scenario", "ContIV", "--N", "100", "--n", "500", "--seed", "8",
        "--algos", "ATE_zhangbareinboim", "--out", out.to_str().unwrap(),
    ])?;
    let mut contains = 0;
    let bounds = csv_rows(&out.join("bounds.csv"))?;
    for row in &bounds {
        let j: usize = row["j"].parse().map_err(|_| "bad j".to_string())?;
        let path = out.join(format!("data/sim_{j:05}.truth.json"));
        let truth: Truth =
            serde_json::from_str(&fs::read_to_string(path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if row["status"] == "ok" {
            let (lo, hi) = (num(row, "lower")?, num(row, "upper")?);
            if lo - 1e-9 <= truth.true_ate && truth.true_ate <= hi + 1e-9 {
                contains += 1;
            }
        }
    }
    let rate = 100.0 * contains as f64 / bounds.len() as f64;
    ensure(
        zb.width() <= 1e-9 && bounds.len() == 100 && rate >= 85.0,
        format!("perfect-compliance width {:.1e}; ContIV coverage {rate:.1}% of {}", zb.width(), bounds.len()),
    )
    .and_then(|m| within_time(start, Duration::from_secs(300), m))
}

fn outcome(j: usize, algo: &str, b: Option<(f64, f64)>, truth: f64) -> RunOutcome {
    RunOutcome {
        j,
        algorithm: algo.into(),
        result: match b {
            Some((lower, upper)) => BoundResult::Bounds(Interval { lower, upper }),
            None => BoundResult::Failure("fixture".into()),
        },
        truth,
    }
}

fn a9() -> Check {
    let table = evaluate(
        &[outcome(1, "a", Some((0.0, 0.4)), 0.2), outcome(2, "a", Some((0.0, 0.4)), 0.9)],
        Query::Ate,
    )
    .map_err(|e| e.to_string())?;
    let a = table.get("a").ok_or("missing row")?;
    let table_ok = a.bound_width == 60.0 && a.net_bound_width == Some(20.0) && a.invalid_rate == Some(50.0);

    let clipped = evaluate(&[outcome(1, "c", Some((-3.0, 0.0)), -0.5)], Query::Ate).map_err(|e| e.to_string())?;
    let clip_ok = clipped.rows[0].net_bound_width == Some(50.0);

    let q = Query::Ate;
    let best_ok = best_algorithm(&[outcome(1, "a", Some((0.0, 0.5)), 0.2), outcome(1, "b", Some((0.0, 0.3)), 0.2)], q)
        .as_deref()
        == Some("b")
        && best_algorithm(&[outcome(1, "a", Some((0.0, 0.3)), 0.34), outcome(1, "b", Some((0.0, 0.5)), 0.34)], q)
            .as_deref()
            == Some("b")
        && best_algorithm(&[outcome(1, "a", Some((0.0, 0.3)), 0.31), outcome(1, "b", Some((0.0, 0.5)), 0.31)], q)
            .as_deref()
            == Some("a")
        && best_algorithm(&[outcome(1, "a", None, 0.0)], q).is_none();
    ensure(
        table_ok && clip_ok && best_ok,
        format!(
            "width {} net {:?} invalid {:?}; clipping {clip_ok}; best {best_ok}",
            a.bound_width, a.net_bound_width, a.invalid_rate
        ),
    )
}

/// Every file under `dir`, with the runtime column of bounds.csv removed.
fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
            let mut bytes = fs::read(&path).map_err(|e| e.to_string())?;
            if rel == "bounds.csv" {
                let mut r = csv::Reader::from_reader(bytes.as_slice());
                let header = r.headers().map_err(|e| e.to_string())?.clone();
                let keep: Vec<usize> = (0..header.len()).filter(|&i| &header[i] != "runtime_s").collect();
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(keep.iter().map(|&i| &header[i])).unwrap();
                for rec in r.records() {
                    let rec = rec.map_err(|e| e.to_string())?;
                    w.write_record(keep.iter().map(|&i| &rec[i])).unwrap();
                }
                bytes = w.into_inner().unwrap();
            }
            files.insert(rel, bytes);
        }
    }
    Ok(files)
}

fn a10(tmp: &Path) -> Check {
    let mut summary = Vec::new();
    for scenario in ["BinaryIV", "BinaryEntropyConf", "ContIV"] {
        let mut snaps = Vec::new();
        for k in 0..2 {
            let out = tmp.join(format!("a10-{scenario}-{k}"));
            cbounds(&["run", "--scenario", scenario, "--N", "20", "--n", "300", "--seed", "10", "--out", out.to_str().unwrap()])?;
            snaps.push(snapshot(&out)?);
        }
        let differing: Vec<_> = snaps[0]
            .iter()
            .filter(|(k, v)| snaps[1].get(*k) != Some(v))
            .map(|(k, _)| k.clone())
            .collect();
        if !differing.is_empty() || snaps[0].len() != snaps[1].len() {
            return Err(format!("{scenario}: outputs differ: {differing:?}"));
        }
        summary.push(format!("{scenario} {} files", snaps[0].len()));
    }
    Ok(format!("identical outputs: {}", summary.join(", ")))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let t = tmp.path();
    let criteria: [(&str, Box<dyn Fn() -> Check + '_>); 10] = [
        ("A1", Box::new(a1)),
        ("A2", Box::new(a2)),
        ("A3", Box::new(a3)),
        ("A4", Box::new(a4)),
        ("A5", Box::new(|| a5(t))),
        ("A6", Box::new(|| a6(t))),
        ("A7", Box::new(|| a7(t))),
        ("A8", Box::new(|| a8(t))),
        ("A9", Box::new(a9)),
        ("A10", Box::new(|| a10(t))),
    ];
    let mut failed = 0;
    for (id, check) in criteria.iter() {
        match check() {
            Ok(msg) => println!("{id} PASS {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{id} FAIL {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
