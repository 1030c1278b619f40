//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Solves `min/max c'x  s.t.  Ax = b, x >= 0`. Every LP in this crate has a
//! handful of rows (up to a few hundred for the Boolean problem), so a dense
//! tableau is plenty. After the pivoting finishes the optimum is checked
//! independently against the original data: primal residual, sign of the
//! solution, and reduced costs from duals recomputed off the final basis.

use std::fmt;

use crate::error::{Error, Result};

/// Pivot elements below this magnitude are treated as zero.
pub const PIVOT_TOL: f64 = 1e-9;
/// Reduced-cost optimality tolerance.
pub const OPT_TOL: f64 = 1e-9;
/// Primal feasibility tolerance, relative to `max(1, |b|_inf)`.
pub const FEAS_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub sense: Sense,
    /// Row-major equality constraints, one `Vec` per row.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Objective value; `NaN` unless optimal.
    pub value: f64,
    /// Primal solution; empty unless optimal. When the optimum is not
    /// unique this is whichever vertex the pivot rule reached.
    pub solution: Vec<f64>,
}

impl LpResult {
    fn status_only(status: LpStatus) -> Self {
        LpResult { status, value: f64::NAN, solution: Vec::new() }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, sense: Sense, rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Self {
        LpProblem { objective, sense, rows, rhs }
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if n == 0 {
            return Err(Error::input("LP has no variables"));
        }
        if self.rows.len() != self.rhs.len() {
            return Err(Error::input(format!(
                "LP has {} rows but {} right-hand sides",
                self.rows.len(),
                self.rhs.len()
            )));
        }
        if let Some(r) = self.rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: r.len() });
        }
        let finite = self
            .objective
            .iter()
            .chain(self.rows.iter().flatten())
            .chain(&self.rhs)
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::input("LP data must be finite"));
        }
        Ok(())
    }
}

struct Tableau {
    /// `m` constraint rows of width `width`; the last column is the rhs.
    cells: Vec<f64>,
    width: usize,
    /// Reduced costs for the current phase, same width (last entry = -z).
    cost: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.cells[r * self.width..(r + 1) * self.width]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(pr, pc);
        for x in &mut self.cells[pr * w..(pr + 1) * w] {
            *x *= inv;
        }
        let pivot_row: Vec<f64> = self.row(pr).to_vec();
        for r in 0..self.rows() {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f != 0.0 {
                let row = &mut self.cells[r * w..(r + 1) * w];
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
                row[pc] = 0.0;
                // degenerate rows pick up rounding noise below zero
                if row[w - 1] < 0.0 && row[w - 1] > -FEAS_TOL {
                    row[w - 1] = 0.0;
                }
            }
        }
        let f = self.cost[pc];
        if f != 0.0 {
            for (x, p) in self.cost.iter_mut().zip(&pivot_row) {
                *x -= f * p;
            }
            self.cost[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Recomputes the reduced-cost row for column costs `c` (length width-1).
    fn price(&mut self, c: &[f64]) {
        let w = self.width;
        let mut cost = c.to_vec();
        cost.push(0.0);
        for r in 0..self.rows() {
            let cb = c[self.basis[r]];
            if cb != 0.0 {
                for (x, t) in cost.iter_mut().zip(&self.cells[r * w..(r + 1) * w]) {
                    *x -= cb * t;
                }
            }
        }
        self.cost = cost;
    }

    /// Bland's rule minimisation over columns `< allowed`.
    fn run(&mut self, allowed: usize) -> Result<LpStatus> {
        for _ in 0..MAX_PIVOTS {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] < -OPT_TOL) else {
                return Ok(LpStatus::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows() {
                let a = self.at(r, enter);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if (!tie && ratio < bratio) || (tie && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(LpStatus::Unbounded),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
        Err(Error::Numerical(format!("simplex did not terminate within {MAX_PIVOTS} pivots")))
    }
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpResult> {
    problem.validate()?;
    let n = problem.objective.len();
    let m = problem.rows.len();
    let scale = problem.rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));

    // min form
    let c: Vec<f64> = match problem.sense {
        Sense::Minimize => problem.objective.clone(),
        Sense::Maximize => problem.objective.iter().map(|x| -x).collect(),
    };

    // columns: n structural, m artificial, rhs
    let width = n + m + 1;
    let mut cells = vec![0.0; m * width];
    for (r, (row, &b)) in problem.rows.iter().zip(&problem.rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let dst = &mut cells[r * width..(r + 1) * width];
        for (d, a) in dst.iter_mut().zip(row) {
            *d = sign * a;
        }
        dst[n + r] = 1.0;
        dst[width - 1] = sign * b;
    }
    let mut t = Tableau { cells, width, cost: Vec::new(), basis: (n..n + m).collect() };

    // phase 1: minimise the sum of artificials
    let mut phase1 = vec![0.0; n + m];
    for x in &mut phase1[n..] {
        *x = 1.0;
    }
    t.price(&phase1);
    if t.run(n + m)? != LpStatus::Optimal {
        return Err(Error::Numerical("phase one reported unbounded".into()));
    }
    let infeasibility = -t.cost[width - 1];
    if infeasibility > FEAS_TOL * scale {
        return Ok(LpResult::status_only(LpStatus::Infeasible));
    }

    // drive remaining artificials out; rows where that is impossible are
    // linearly dependent on the others and get dropped
    let mut r = 0;
    while r < t.rows() {
        if t.basis[r] < n {
            r += 1;
            continue;
        }
        let best = (0..n)
            .map(|j| (j, t.at(r, j).abs()))
            .filter(|&(_, a)| a > PIVOT_TOL)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, _)) => {
                t.pivot(r, j);
                r += 1;
            }
            None => {
                t.cells.drain(r * width..(r + 1) * width);
                t.basis.remove(r);
            }
        }
    }
    // clamp rounding noise left by the artificial exchange
    for r in 0..t.rows() {
        let idx = r * width + width - 1;
        if t.cells[idx] < 0.0 {
            if t.cells[idx] < -FEAS_TOL * scale {
                return Err(Error::Numerical("negative basic value after phase one".into()));
            }
            t.cells[idx] = 0.0;
        }
    }

    // phase 2
    let mut c_ext = c.clone();
    c_ext.extend(std::iter::repeat_n(0.0, m));
    t.price(&c_ext);
    match t.run(n)? {
        LpStatus::Optimal => {}
        status => return Ok(LpResult::status_only(status)),
    }

    let mut x = vec![0.0; n];
    for r in 0..t.rows() {
        x[t.basis[r]] = t.rhs(r);
    }
    refine(problem, &mut x, &t.basis, scale);
    let value: f64 = problem.objective.iter().zip(&x).map(|(a, b)| a * b).sum();
    certify(problem, &c, &x, &t.basis, scale)?;
    Ok(LpResult { status: LpStatus::Optimal, value, solution: x })
}

/// Recomputes the basic values from the original rows, undoing round-off
/// accumulated over many pivots. Keeps the tableau values if the re-solve
/// is singular or leaves the nonnegative orthant.
fn refine(problem: &LpProblem, x: &mut [f64], basis: &[usize], scale: f64) {
    let k = basis.len();
    if k == 0 {
        return;
    }
    let Some(rows) = independent_rows(problem, basis, k) else { return };
    let mat = rows
        .iter()
        .map(|&r| basis.iter().map(|&j| problem.rows[r][j]).chain([problem.rhs[r]]).collect())
        .collect();
    let Some(xb) = gauss_solve(mat) else { return };
    if xb.iter().any(|v| !v.is_finite() || *v < -FEAS_TOL * scale) {
        return;
    }
    for (&j, v) in basis.iter().zip(xb) {
        x[j] = v.max(0.0);
    }
}

/// Checks feasibility of `x` and dual feasibility of the basis against the
/// original (unpivoted) data.
fn certify(problem: &LpProblem, c_min: &[f64], x: &[f64], basis: &[usize], scale: f64) -> Result<()> {
    if let Some(v) = x.iter().find(|v| **v < -1e-12) {
        return Err(Error::Numerical(format!("solution has negative entry {v}")));
    }
    for (row, b) in problem.rows.iter().zip(&problem.rhs) {
        let ax: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        if (ax - b).abs() > FEAS_TOL * scale {
            return Err(Error::Numerical(format!("primal residual {} too large", (ax - b).abs())));
        }
    }
    if basis.is_empty() {
        if let Some(j) = (0..x.len()).find(|&j| c_min[j] < -OPT_TOL) {
            return Err(Error::Numerical(format!("column {j} has negative reduced cost")));
        }
        return Ok(());
    }
    // pick an independent set of original rows matching the basis size
    let k = basis.len();
    let rows = independent_rows(problem, basis, k)
        .ok_or_else(|| Error::Numerical("final basis is singular".into()))?;
    // B' y = c_B
    let mut mat = vec![vec![0.0; k + 1]; k];
    for (i, &bj) in basis.iter().enumerate() {
        for (jj, &r) in rows.iter().enumerate() {
            mat[i][jj] = problem.rows[r][bj];
        }
        mat[i][k] = c_min[bj];
    }
    let y = gauss_solve(mat).ok_or_else(|| Error::Numerical("final basis is singular".into()))?;
    for j in 0..x.len() {
        let dot: Vec<f64> = rows.iter().zip(&y).map(|(&r, yv)| problem.rows[r][j] * yv).collect();
        let magnitude = dot.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let reduced = c_min[j] - dot.iter().sum::<f64>();
        if reduced < -OPT_TOL * magnitude {
            return Err(Error::Numerical(format!(
                "column {j} has reduced cost {reduced} at the reported optimum"
            )));
        }
    }
    Ok(())
}

/// Greedy choice of `k` original rows whose restriction to the basis
/// columns is nonsingular.
fn independent_rows(problem: &LpProblem, basis: &[usize], k: usize) -> Option<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut reduced: Vec<Vec<f64>> = Vec::new();
    for (r, row) in problem.rows.iter().enumerate() {
        let mut v: Vec<f64> = basis.iter().map(|&j| row[j]).collect();
        for pivot_row in &reduced {
            let lead = leading(pivot_row);
            let f = v[lead] / pivot_row[lead];
            if f != 0.0 {
                for (a, b) in v.iter_mut().zip(pivot_row) {
                    *a -= f * b;
                }
            }
        }
        let norm = row.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        if v.iter().any(|a| a.abs() > 1e-9 * norm) {
            chosen.push(r);
            reduced.push(v);
            if chosen.len() == k {
                return Some(chosen);
            }
        }
    }
    None
}

fn leading(v: &[f64]) -> usize {
    let (i, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty");
    i
}

/// Gaussian elimination with partial pivoting on an augmented `k x (k+1)`
/// matrix.
fn gauss_solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = a.len();
    for col in 0..k {
        let p = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, p);
        for r in (col + 1)..k {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut y = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = ((r + 1)..k).map(|c| a[r][c] * y[c]).sum();
        y[r] = (a[r][k] - s) / a[r][r];
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(obj: &[f64], sense: Sense, rows: &[&[f64]], rhs: &[f64]) -> LpProblem {
        LpProblem::new(obj.to_vec(), sense, rows.iter().map(|r| r.to_vec()).collect(), rhs.to_vec())
    }

    #[test]
    fn single_variable_equality() {
        let r = solve_lp(&lp(&[1.0], Sense::Minimize, &[&[1.0]], &[0.3])).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.value - 0.3).abs() < 1e-15);
    }

    #[test]
    fn mass_on_cheapest_coefficient() {
        let r = solve_lp(&lp(&[1.0, 1.0], Sense::Maximize, &[&[1.0, 2.0]], &[1.0])).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.solution, vec![1.0, 0.0]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let r = solve_lp(&lp(&[1.0], Sense::Minimize, &[&[1.0]], &[-1.0])).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
        let r = solve_lp(&lp(&[1.0, 0.0], Sense::Maximize, &[&[1.0, -1.0]], &[0.0])).unwrap();
        assert_eq!(r.status, LpStatus::Unbounded);
        assert!(r.value.is_nan());
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let r = solve_lp(&lp(
            &[1.0, 2.0, 0.0],
            Sense::Minimize,
            &[&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0], &[0.0, 1.0, 0.0]],
            &[1.0, 2.0, 0.25],
        ))
        .unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_rows() {
        let r = solve_lp(&lp(&[1.0, 3.0], Sense::Minimize, &[], &[])).unwrap();
        assert_eq!(r.value, 0.0);
        let r = solve_lp(&lp(&[1.0], Sense::Maximize, &[], &[])).unwrap();
        assert_eq!(r.status, LpStatus::Unbounded);
    }

    #[test]
    fn malformed_problems() {
        assert!(solve_lp(&lp(&[], Sense::Minimize, &[], &[])).is_err());
        assert!(solve_lp(&lp(&[1.0], Sense::Minimize, &[&[1.0, 2.0]], &[1.0])).is_err());
        assert!(solve_lp(&lp(&[1.0], Sense::Minimize, &[&[1.0]], &[])).is_err());
        assert!(solve_lp(&lp(&[f64::NAN], Sense::Minimize, &[&[1.0]], &[1.0])).is_err());
    }

    /// Brute force over all 2x2 bases of a 2-row system.
    fn vertex_enumeration(obj: &[f64], rows: [&[f64]; 2], rhs: [f64; 2], sense: Sense) -> f64 {
        let n = obj.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let det = rows[0][i] * rows[1][j] - rows[0][j] * rows[1][i];
                if det.abs() < 1e-14 {
                    continue;
                }
                let xi = (rhs[0] * rows[1][j] - rhs[1] * rows[0][j]) / det;
                let xj = (rows[0][i] * rhs[1] - rows[1][i] * rhs[0]) / det;
                if xi < -1e-12 || xj < -1e-12 {
                    continue;
                }
                let v = obj[i] * xi + obj[j] * xj;
                best = Some(match (best, sense) {
                    (None, _) => v,
                    (Some(b), Sense::Minimize) => b.min(v),
                    (Some(b), Sense::Maximize) => b.max(v),
                });
            }
        }
        best.unwrap()
    }

    #[test]
    fn reduced_moment_problem_matches_vertex_enumeration() {
        // N = 3, m = 2: rows i and C(i, 2)
        let obj = [1.0, 1.0, 1.0];
        let r1: &[f64] = &[1.0, 2.0, 3.0];
        let r2: &[f64] = &[0.0, 1.0, 3.0];
        for sense in [Sense::Minimize, Sense::Maximize] {
            let expected = vertex_enumeration(&obj, [r1, r2], [1.5, 0.75], sense);
            let got = solve_lp(&lp(&obj, sense, &[r1, r2], &[1.5, 0.75])).unwrap();
            assert!((got.value - expected).abs() < 1e-12, "{sense:?}: {} vs {expected}", got.value);
        }
        // frozen from the enumeration above
        let min = solve_lp(&lp(&obj, Sense::Minimize, &[r1, r2], &[1.5, 0.75])).unwrap();
        let max = solve_lp(&lp(&obj, Sense::Maximize, &[r1, r2], &[1.5, 0.75])).unwrap();
        assert!((min.value - 0.75).abs() < 1e-12);
        assert!((max.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic cycling example (Beale) in equality form with slacks
        let r = solve_lp(&lp(
            &[-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0],
            Sense::Minimize,
            &[
                &[0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
                &[0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            &[0.0, 0.0, 1.0],
        ))
        .unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.value + 0.05).abs() < 1e-12);
    }
}
