//! Independent brute-force oracles used by the integration and acceptance
//! tests. Nothing here calls into the library's solvers.

use nalgebra::{DMatrix, DVector};

/// Optimizes `c·v` over `{v ≥ 0 : A v = b}` by enumerating every basic
/// feasible solution. Returns `(min, max)` or `None` when infeasible.
pub fn vertex_enumeration(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, f64)> {
    let n = c.len();
    // Keep a maximal set of linearly independent rows.
    let mut rows: Vec<usize> = Vec::new();
    for i in 0..a.len() {
        let mut trial = rows.clone();
        trial.push(i);
        let m = DMatrix::from_fn(trial.len(), n, |r, k| a[trial[r]][k]);
        if m.rank(1e-10) == trial.len() {
            rows = trial;
        }
    }
    let m = rows.len();
    let mut best: Option<(f64, f64)> = None;
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        let basis = DMatrix::from_fn(m, m, |r, k| a[rows[r]][subset[k]]);
        if basis.determinant().abs() > 1e-10 {
            let rhs = DVector::from_fn(m, |r, _| b[rows[r]]);
            if let Some(xb) = basis.lu().solve(&rhs) {
                let mut v = vec![0.0; n];
                for (k, &col) in subset.iter().enumerate() {
                    v[col] = xb[k];
                }
                let residual = (0..a.len())
                    .map(|i| (a[i].iter().zip(&v).map(|(p, q)| p * q).sum::<f64>() - b[i]).abs())
                    .fold(0.0, f64::max);
                if v.iter().all(|&x| x >= -1e-10) && residual < 1e-8 {
                    let val: f64 = c.iter().zip(&v).map(|(p, q)| p * q).sum();
                    best = Some(match best {
                        None => (val, val),
                        Some((lo, hi)) => (lo.min(val), hi.max(val)),
                    });
                }
            }
        }
        // next m-subset of 0..n in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < n - m + i {
                subset[i] += 1;
                for k in i + 1..m {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn plogp_ratio(a: f64, b: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else {
        a * (a / b.max(1e-300)).log2()
    }
}

/// `I(X; Y_arm)` when the counterfactual column is `P(Y_arm = 1 | X = other) = t`.
fn arm_mi(p: [[f64; 2]; 2], arm: usize, t: f64) -> f64 {
    let px = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
    let mut col = [[0.0; 2]; 2];
    col[arm] = [p[arm][0] / px[arm], p[arm][1] / px[arm]];
    col[1 - arm] = [1.0 - t, t];
    let mut mi = 0.0;
    for y in 0..2 {
        let m = px[0] * col[0][y] + px[1] * col[1][y];
        for x in 0..2 {
            mi += px[x] * plogp_ratio(col[x][y], m);
        }
    }
    mi
}

/// Bounds on `P(Y = 1 | do(X = arm))` under `I ≤ θ` from a dense grid over
/// the single free cell.
pub fn ate_arm_grid(p: [[f64; 2]; 2], arm: usize, theta: f64, steps: usize) -> (f64, f64) {
    let px = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
    let base = p[arm][1];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        if arm_mi(p, arm, t) <= theta {
            let v = base + t * px[1 - arm];
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

/// ATE bounds composed from the two grid arms.
pub fn ate_grid(p: [[f64; 2]; 2], theta: f64, steps: usize) -> (f64, f64) {
    let (l1, u1) = ate_arm_grid(p, 1, theta, steps);
    let (l0, u0) = ate_arm_grid(p, 0, theta, steps);
    ((l1 - u0).max(-1.0), (u1 - l0).min(1.0))
}

/// `I(X; (Y₀, Y₁))` for `q` indexed `4·y1 + 2·y0 + x`.
pub fn pns_mi(q: &[f64; 8]) -> f64 {
    let mut px = [0.0; 2];
    let mut ps = [0.0; 4];
    for i in 0..8 {
        px[i % 2] += q[i];
        ps[i / 2] += q[i];
    }
    (0..8)
        .map(|i| plogp_ratio(q[i], ps[i / 2] * px[i % 2]))
        .sum()
}

/// `q` from the free fractions: `q4 = a·p00, q6 = b·p01, q3 = c·p10, q5 = d·p11`.
pub fn pns_point(p: [[f64; 2]; 2], a: f64, b: f64, c: f64, d: f64) -> [f64; 8] {
    [
        (1.0 - a) * p[0][0],
        (1.0 - c) * p[1][0],
        (1.0 - b) * p[0][1],
        c * p[1][0],
        a * p[0][0],
        d * p[1][1],
        b * p[0][1],
        (1.0 - d) * p[1][1],
    ]
}

fn golden(mut lo: f64, mut hi: f64, iters: usize, f: &mut dyn FnMut(f64) -> f64) -> f64 {
    const R: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - R * (hi - lo);
    let mut x2 = lo + R * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - R * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + R * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2).min(f(lo)).min(f(hi))
}

/// Minimum of `I(X; (Y₀, Y₁))` over data-compatible `q` with PNS `= v`.
pub fn pns_slice_min_mi(p: [[f64; 2]; 2], v: f64, iters: usize) -> f64 {
    let (p00, p11) = (p[0][0], p[1][1]);
    let a_lo = ((v - p11) / p00).max(0.0);
    let a_hi = (v / p00).min(1.0);
    if a_lo > a_hi {
        return f64::INFINITY;
    }
    golden(a_lo, a_hi, iters, &mut |a| {
        let d = ((v - a * p00) / p11).clamp(0.0, 1.0);
        golden(0.0, 1.0, iters, &mut |b| {
            golden(0.0, 1.0, iters, &mut |c| pns_mi(&pns_point(p, a, b, c, d)))
        })
    })
}

/// PNS bounds under `I ≤ θ` by bisection on the objective value, with the
/// slice feasibility decided by nested golden-section search.
/// Requires `p00, p11 > 0` and both arms non-empty.
pub fn pns_oracle(p: [[f64; 2]; 2], theta: f64, iters: usize) -> (f64, f64) {
    let px = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
    let start = (p[1][1] / px[1]) * (p[0][0] / px[0]);
    let feasible = |v: f64| pns_slice_min_mi(p, v, iters) <= theta;
    let v_max = (p[0][0] + p[1][1]).min(1.0);
    let search = |mut inside: f64, mut outside: f64| {
        if feasible(outside) {
            return outside;
        }
        for _ in 0..30 {
            let mid = 0.5 * (inside + outside);
            if feasible(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    (search(start, 0.0), search(start, v_max))
}
