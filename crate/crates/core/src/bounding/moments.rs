use crate::error::{Error, Result};
use crate::screening::MomentVector;

use super::{min_max, BoundPair};

/// Moment order used by the Q-augmented problems unless told otherwise.
pub const DEFAULT_Q_ORDER: usize = 3;

/// `C(n, k)` computed exactly in integers, converted once at the end.
/// Falls back to floating point only if the value overflows `u128`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => return binomial_float(n, k),
        }
    }
    acc as f64
}

fn binomial_float(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Which unknowns and which constraint rows a moment problem carries.
struct Layout {
    /// Smallest count `i` with a variable `p_i`.
    first: usize,
    n_events: usize,
}

impl Layout {
    fn counts(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.n_events
    }

    fn row(&self, k: usize) -> Vec<f64> {
        self.counts().map(|i| binomial(i, k)).collect()
    }

    fn objective(&self, f: impl Fn(usize) -> bool) -> Vec<f64> {
        self.counts().map(|i| if f(i) { 1.0 } else { 0.0 }).collect()
    }
}

fn check_order(s: &MomentVector, m: usize) -> Result<()> {
    if m > s.n_events() {
        return Err(Error::input(format!("moment order m = {m} exceeds N = {}", s.n_events())));
    }
    if m > s.m() {
        return Err(Error::input(format!("m = {m} requested but only {} moments given", s.m())));
    }
    Ok(())
}

/// Constraints `sum_i C(i, k) p_i = S_k` for `k` in `from..=m`.
fn moment_rows(layout: &Layout, s: &MomentVector, from: usize, m: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    (from..=m).map(|k| (layout.row(k), s.s(k))).unzip()
}

/// Bounds on `P(at least one event)` from `S_1..S_m`.
///
/// With `include_p0` the unknowns are `p_0..p_N` and the rows run over
/// `k = 0..m` (so `sum p_i = 1` is enforced). Without it `p_0` and the
/// `k = 0` row are dropped, which is the smaller classical problem whose
/// upper bound may exceed one.
pub fn union_bounds(s: &MomentVector, m: usize, include_p0: bool) -> Result<BoundPair> {
    check_order(s, m)?;
    let (first, method) = if include_p0 { (0, "moment-union") } else { (1, "moment-union-reduced") };
    let layout = Layout { first, n_events: s.n_events() };
    if layout.counts().is_empty() {
        return Err(Error::input("no events to bound"));
    }
    let (rows, rhs) = moment_rows(&layout, s, first, m);
    min_max(method, layout.objective(|i| i >= 1), rows, rhs)
}

/// Bounds on `P(xi >= r)`, `1 <= r <= N`, from `S_0..S_m`.
pub fn atleast_r_bounds(s: &MomentVector, m: usize, r: usize) -> Result<BoundPair> {
    check_order(s, m)?;
    if r == 0 || r > s.n_events() {
        return Err(Error::input(format!("r = {r} must lie in 1..={}", s.n_events())));
    }
    let layout = Layout { first: 0, n_events: s.n_events() };
    let (rows, rhs) = moment_rows(&layout, s, 0, m);
    min_max("moment-atleast", layout.objective(|i| i >= r), rows, rhs)
}

/// Bounds on `P(xi = r)`, `0 <= r <= N`, from `S_0..S_m`.
pub fn exactly_r_bounds(s: &MomentVector, m: usize, r: usize) -> Result<BoundPair> {
    check_order(s, m)?;
    if r > s.n_events() {
        return Err(Error::input(format!("r = {r} must lie in 0..={}", s.n_events())));
    }
    let layout = Layout { first: 0, n_events: s.n_events() };
    let (rows, rhs) = moment_rows(&layout, s, 0, m);
    min_max("moment-exactly", layout.objective(|i| i == r), rows, rhs)
}

/// Unknowns `p_1..p_N`; rows `sum p_i = Q` and `sum C(i,k) p_i = S_k` for
/// `k = 1..m`.
fn q_problem(s: &MomentVector, m: usize) -> Result<(Layout, Vec<Vec<f64>>, Vec<f64>)> {
    check_order(s, m)?;
    let q = s
        .q()
        .ok_or_else(|| Error::input("the union probability Q is required for Q-augmented bounds"))?;
    let layout = Layout { first: 1, n_events: s.n_events() };
    let mut rows = vec![layout.row(0)];
    let mut rhs = vec![q];
    let (r, b) = moment_rows(&layout, s, 1, m);
    rows.extend(r);
    rhs.extend(b);
    Ok((layout, rows, rhs))
}

/// `P(xi >= r)` bounds with the exact union probability as an extra row.
pub fn q_atleast_bounds(s: &MomentVector, m: usize, r: usize) -> Result<BoundPair> {
    if r == 0 || r > s.n_events() {
        return Err(Error::input(format!("r = {r} must lie in 1..={}", s.n_events())));
    }
    let (layout, rows, rhs) = q_problem(s, m)?;
    min_max("q-moment-atleast", layout.objective(|i| i >= r), rows, rhs)
}

/// `P(xi = r)` bounds with the exact union probability as an extra row.
/// The unknowns start at `p_1`, so `r = 0` is rejected; use `1 - Q`.
pub fn q_exactly_bounds(s: &MomentVector, m: usize, r: usize) -> Result<BoundPair> {
    if r == 0 || r > s.n_events() {
        return Err(Error::input(format!("r = {r} must lie in 1..={}", s.n_events())));
    }
    let (layout, rows, rhs) = q_problem(s, m)?;
    min_max("q-moment-exactly", layout.objective(|i| i == r), rows, rhs)
}
