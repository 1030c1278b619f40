//! Probability bounds from linear programs.
//!
//! The binomial moment problems treat the distribution of the number of
//! occurring events, `p_i = P(xi = i)`, as unknowns constrained by
//! `sum_i C(i, k) p_i = S_k`. Their optima are the sharp bounds given
//! `S_1..S_m`. The Q-augmented variants add the exact union probability as
//! one more row; the Boolean problem works with individual intersection
//! probabilities instead of their sums.

mod boolean;
mod hunter_worsley;
mod moments;
mod simplex;

pub use boolean::{boolean_lp_bounds, BooleanSystem, BooleanTarget, BOOLEAN_MAX_EVENTS};
pub use hunter_worsley::{hunter_worsley_from_boxes, hunter_worsley_upper};
pub use moments::{
    atleast_r_bounds, binomial, exactly_r_bounds, q_atleast_bounds, q_exactly_bounds, union_bounds,
    DEFAULT_Q_ORDER,
};
pub use simplex::{solve_lp, LpProblem, LpResult, LpStatus, Sense, FEAS_TOL, OPT_TOL, PIVOT_TOL};

use crate::error::{Error, Result};

/// Lower and upper bound on a probability together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub method: String,
}

impl BoundPair {
    pub fn contains(&self, value: f64, tol: f64) -> bool {
        self.lower - tol <= value && value <= self.upper + tol
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Minimises and maximises the same objective over `rows x = rhs, x >= 0`.
pub(crate) fn min_max(
    method: &str,
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
) -> Result<BoundPair> {
    let mut problem = LpProblem::new(objective, Sense::Minimize, rows, rhs);
    let lower = optimum(method, &problem)?;
    problem.sense = Sense::Maximize;
    let upper = optimum(method, &problem)?;
    Ok(BoundPair { lower, upper, method: method.to_string() })
}

fn optimum(method: &str, problem: &LpProblem) -> Result<f64> {
    let r = solve_lp(problem)?;
    if r.status != LpStatus::Optimal {
        return Err(Error::Lp { method: method.to_string(), status: r.status });
    }
    Ok(r.value)
}
