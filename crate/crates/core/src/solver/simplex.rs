use super::{dot, LinearProgram, LpSolution, LpStatus, Sense, FEAS_TOL, RESIDUAL_TOL};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-7;
const COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;
/// Pivots between rebuilds of the tableau from the original rows.
const REINVERT_EVERY: usize = 20;

/// Dense tableau in standard form `A u = b, u ≥ 0, b ≥ 0`.
///
/// Columns: structural (shifted by their lower bounds), then slacks, then
/// artificials. Row `m` is the reduced-cost row; its last entry is `-z`.
struct Tableau {
    m: usize,
    width: usize,
    art_start: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
    /// Constraint rows as loaded, kept for reinversion.
    original: Vec<Vec<f64>>,
    /// Original rows found redundant and dropped.
    dropped: Vec<bool>,
    /// Original row that owns each artificial column.
    art_owner: Vec<usize>,
    cost: Vec<f64>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * (self.width + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.cells[r * (self.width + 1) + self.width]
    }

    fn row(&self, r: usize) -> &[f64] {
        let w = self.width + 1;
        &self.cells[r * w..(r + 1) * w]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width + 1;
        let piv = self.at(pr, pc);
        for c in 0..w {
            self.cells[pr * w + c] /= piv;
        }
        let pivot_row: Vec<f64> = self.row(pr).to_vec();
        for r in 0..=self.m {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f == 0.0 {
                continue;
            }
            let base = r * w;
            for (c, &pv) in pivot_row.iter().enumerate() {
                if pv != 0.0 {
                    self.cells[base + c] -= f * pv;
                }
            }
            self.cells[base + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Loads the reduced-cost row for `cost` (indexed by column).
    fn set_costs(&mut self, cost: &[f64]) {
        self.cost = cost.to_vec();
        let w = self.width + 1;
        let mut obj = vec![0.0; w];
        obj[..self.width].copy_from_slice(&cost[..self.width]);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (c, o) in obj.iter_mut().enumerate() {
                    *o -= cb * self.at(r, c);
                }
            }
        }
        let base = self.m * w;
        self.cells[base..base + w].copy_from_slice(&obj);
    }

    /// Recomputes `B⁻¹ [A | b]` for the current basis from the original
    /// rows, discarding round-off accumulated by successive pivots. Leaves
    /// the tableau untouched if the basis is numerically singular.
    fn reinvert(&mut self) {
        let w = self.width + 1;
        let mut rows: Vec<Vec<f64>> = self
            .original
            .iter()
            .zip(&self.dropped)
            .filter(|(_, &d)| !d)
            .map(|(r, _)| r.clone())
            .collect();
        if rows.len() != self.m {
            return;
        }
        let mut assigned = vec![false; self.m];
        let mut new_basis = vec![0usize; self.m];
        for &c in &self.basis {
            let Some(pr) = (0..self.m)
                .filter(|&r| !assigned[r])
                .max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs()))
            else {
                return;
            };
            let piv = rows[pr][c];
            if piv.abs() < 1e-12 {
                return;
            }
            rows[pr].iter_mut().for_each(|v| *v /= piv);
            let prow = rows[pr].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != pr {
                    let f = row[c];
                    if f != 0.0 {
                        row.iter_mut().zip(&prow).for_each(|(v, p)| *v -= f * p);
                        row[c] = 0.0;
                    }
                }
            }
            assigned[pr] = true;
            new_basis[pr] = c;
        }
        for (r, row) in rows.iter().enumerate() {
            self.cells[r * w..(r + 1) * w].copy_from_slice(row);
        }
        self.basis = new_basis;
        let cost = std::mem::take(&mut self.cost);
        self.set_costs(&cost);
    }

    /// Bland's-rule primal simplex on the current cost row. Columns at or
    /// beyond `col_limit` never enter. Returns `false` on unboundedness.
    fn optimize(&mut self, col_limit: usize) -> Result<bool> {
        let mut since_reinvert = 0;
        for _ in 0..MAX_PIVOTS {
            let mut entering = (0..col_limit).find(|&c| self.at(self.m, c) < -COST_TOL);
            if entering.is_none() && since_reinvert > 0 {
                self.reinvert();
                since_reinvert = 0;
                entering = (0..col_limit).find(|&c| self.at(self.m, c) < -COST_TOL);
            }
            let Some(pc) = entering else {
                return Ok(true);
            };
            // Harris two-pass ratio test: allow each basic variable to dip
            // FEAS_TOL below zero, then take the largest pivot among the
            // rows that fit. Remaining ties fall back to Bland's order.
            let mut bound = f64::INFINITY;
            for r in 0..self.m {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    bound = bound.min((self.rhs(r).max(0.0) + FEAS_TOL) / a);
                }
            }
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, pc);
                if a > PIVOT_TOL && self.rhs(r).max(0.0) / a <= bound {
                    best = match best {
                        Some((br, ba)) if ba > a || (ba == a && self.basis[br] < self.basis[r]) => {
                            Some((br, ba))
                        }
                        _ => Some((r, a)),
                    };
                }
            }
            match best {
                Some((pr, _)) => self.pivot(pr, pc),
                None => return Ok(false),
            }
            since_reinvert += 1;
            if since_reinvert >= REINVERT_EVERY {
                self.reinvert();
                since_reinvert = 0;
            }
        }
        Err(Error::IterationLimit)
    }

    /// Drops tableau row `r`, which has become identically zero outside the
    /// artificial columns. Its artificial entries express it as a
    /// combination of original rows; the row with the largest weight is
    /// the dependent one and is dropped from the original system too.
    fn remove_row(&mut self, r: usize) {
        let w = self.width + 1;
        let owner = (self.art_start..self.width)
            .filter(|&c| !self.dropped[self.art_owner[c - self.art_start]])
            .max_by(|&a, &b| self.at(r, a).abs().total_cmp(&self.at(r, b).abs()))
            .map(|c| self.art_owner[c - self.art_start]);
        if let Some(k) = owner {
            self.dropped[k] = true;
        }
        self.cells.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.m -= 1;
    }
}

/// Solves `lp` with a dense two-phase simplex using Bland's anti-cycling rule.
///
/// The returned optimum is re-checked against the original constraints; a
/// residual above `1e-7` is reported as a numerical failure.
pub fn solve_lp(lp: &LinearProgram, sense: Sense) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.nvars;
    let lo: Vec<f64> = lp.var_bounds.iter().map(|b| b.0).collect();

    // Rows as (coefs over structural vars, rhs, is_inequality).
    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    for (a, b) in &lp.eq_constraints {
        rows.push((a.clone(), b - dot(a, &lo), false));
    }
    for (a, b) in &lp.ineq_constraints {
        rows.push((a.clone(), b - dot(a, &lo), true));
    }
    for (j, &(l, h)) in lp.var_bounds.iter().enumerate() {
        if h.is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, h - l, true));
        }
    }

    // Equilibrate rows so that cut rows with steep gradients do not dominate.
    for (a, b, _) in rows.iter_mut() {
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            a.iter_mut().for_each(|v| *v /= scale);
            *b /= scale;
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.2).count();
    // Rows whose slack can start in the basis need no artificial.
    let needs_art: Vec<bool> = rows.iter().map(|r| !(r.2 && r.1 >= 0.0)).collect();
    let n_art = needs_art.iter().filter(|&&b| b).count();
    let art_start = n + n_slack;
    let width = art_start + n_art;

    let w = width + 1;
    let mut cells = vec![0.0; (m + 1) * w];
    let mut basis = vec![0usize; m];
    let (mut slack_col, mut art_col) = (n, art_start);
    let mut art_owner = Vec::with_capacity(n_art);
    for (r, (a, b, ineq)) in rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        let base = r * w;
        for (j, &v) in a.iter().enumerate() {
            cells[base + j] = sign * v;
        }
        cells[base + width] = sign * b;
        if *ineq {
            cells[base + slack_col] = sign;
            if !needs_art[r] {
                basis[r] = slack_col;
            }
            slack_col += 1;
        }
        if needs_art[r] {
            art_owner.push(r);
            cells[base + art_col] = 1.0;
            basis[r] = art_col;
            art_col += 1;
        }
    }
    let mut t = Tableau {
        m,
        width,
        art_start,
        original: (0..m).map(|r| cells[r * w..(r + 1) * w].to_vec()).collect(),
        dropped: vec![false; m],
        art_owner,
        cells,
        basis,
        cost: Vec::new(),
    };

    if n_art > 0 {
        let mut cost = vec![0.0; width];
        cost[art_start..].iter_mut().for_each(|c| *c = 1.0);
        t.set_costs(&cost);
        t.optimize(width)?;
        let infeas = -t.rhs(t.m);
        let scale = 1.0 + rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return Ok(LpSolution::without_optimum(LpStatus::Infeasible));
        }
        // Drive remaining (zero-level) artificials out of the basis.
        let mut r = 0;
        while r < t.m {
            if t.basis[r] >= t.art_start {
                // The artificial sits at a feasibility-tolerance level;
                // snap it to zero so the pivot cannot move other rows.
                let idx = r * (t.width + 1) + t.width;
                t.cells[idx] = 0.0;
                let col = (0..t.art_start)
                    .filter(|&c| t.at(r, c).abs() > 1e-9)
                    .max_by(|&a, &b| t.at(r, a).abs().total_cmp(&t.at(r, b).abs()));
                match col {
                    Some(c) => t.pivot(r, c),
                    None => {
                        t.remove_row(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut cost = vec![0.0; width];
    for (j, &c) in lp.objective.iter().enumerate() {
        cost[j] = if sense == Sense::Max { -c } else { c };
    }
    t.set_costs(&cost);
    if !t.optimize(t.art_start)? {
        return Ok(LpSolution::without_optimum(LpStatus::Unbounded));
    }

    let mut point = lo.clone();
    for r in 0..t.m {
        let c = t.basis[r];
        if c < n {
            point[c] = lo[c] + t.rhs(r).max(0.0);
        }
    }
    let viol = lp.max_violation(&point);
    if viol > RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "simplex optimum violates constraints by {viol:e}"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: lp.objective_value(&point),
        point,
        cuts: 0,
        gap: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_var() -> LinearProgram {
        let mut lp = LinearProgram::new(1).with_objective(vec![1.0]);
        lp.add_le(vec![1.0], 0.4);
        lp
    }

    #[test]
    fn one_variable_program() {
        let s = solve_lp(&one_var(), Sense::Max).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 0.4).abs() < 1e-12);
        let s = solve_lp(&one_var(), Sense::Min).unwrap();
        assert!(s.value.abs() < 1e-12);
    }

    #[test]
    fn infeasible_program() {
        let mut lp = one_var();
        lp.add_ge(vec![1.0], 0.5);
        assert_eq!(
            solve_lp(&lp, Sense::Max).unwrap().status,
            LpStatus::Infeasible
        );
    }

    #[test]
    fn unbounded_program() {
        let mut lp = LinearProgram::new(2).with_objective(vec![1.0, 1.0]);
        lp.add_le(vec![1.0, -1.0], 1.0);
        assert_eq!(
            solve_lp(&lp, Sense::Max).unwrap().status,
            LpStatus::Unbounded
        );
        assert!(solve_lp(&lp, Sense::Min).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 stated twice, plus 2x + 2y = 2.
        let mut lp = LinearProgram::new(2).with_objective(vec![1.0, 0.0]);
        lp.add_eq(vec![1.0, 1.0], 1.0);
        lp.add_eq(vec![1.0, 1.0], 1.0);
        lp.add_eq(vec![2.0, 2.0], 2.0);
        let s = solve_lp(&lp, Sense::Max).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_and_boxed_bounds() {
        // max x - y with x in [-2, 3], y in [1, 5], x + y <= 4.
        let mut lp = LinearProgram::new(2).with_objective(vec![1.0, -1.0]);
        lp.set_bounds(0, -2.0, 3.0).set_bounds(1, 1.0, 5.0);
        lp.add_le(vec![1.0, 1.0], 4.0);
        let s = solve_lp(&lp, Sense::Max).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        let s = solve_lp(&lp, Sense::Min).unwrap();
        assert!((s.value + 7.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_inequality() {
        // x >= 2 written as -x <= -2.
        let mut lp = LinearProgram::new(1).with_objective(vec![1.0]);
        lp.add_le(vec![-1.0], -2.0);
        lp.set_bounds(0, 0.0, 10.0);
        assert!((solve_lp(&lp, Sense::Min).unwrap().value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_programs_rejected() {
        let mut lp = LinearProgram::new(2);
        lp.add_eq(vec![1.0], 1.0);
        assert!(solve_lp(&lp, Sense::Min).is_err());
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 1.0, 0.0);
        assert!(solve_lp(&lp, Sense::Min).is_err());
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's classic cycling example; Bland's rule must terminate.
        let mut lp = LinearProgram::new(4).with_objective(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add_le(vec![0.25, -60.0, -0.04, 9.0], 0.0);
        lp.add_le(vec![0.5, -90.0, -0.02, 3.0], 0.0);
        lp.add_le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let s = solve_lp(&lp, Sense::Min).unwrap();
        assert!((s.value + 0.05).abs() < 1e-9);
    }
}
