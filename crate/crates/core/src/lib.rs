//! Exact probabilities and sharp LP bounds for Boolean functions of
//! hyperrectangle events under product probability measures.
//!
//! Events are axis-aligned boxes given by their lower and upper vertices.
//! Pairwise vertex comparison certifies which intersections are empty, so
//! the inclusion–exclusion sum only runs over the surviving tuples. The
//! resulting binomial moments feed a family of small linear programs that
//! bound the probability that at least one, at least `r`, or exactly `r`
//! of the events occur.

pub mod bounding;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod oracle;
pub mod screening;

pub use bounding::{
    atleast_r_bounds, boolean_lp_bounds, exactly_r_bounds, hunter_worsley_upper, q_atleast_bounds,
    q_exactly_bounds, solve_lp, union_bounds, BooleanSystem, BooleanTarget, BoundPair, LpProblem,
    LpResult, LpStatus, Sense,
};
pub use error::{Error, Result};
pub use geometry::{intersect, is_nonempty, EmptinessMode, EventBox};
pub use measure::{box_probability, cdf, Marginal, ProductMeasure};
pub use oracle::{
    exact_count_distribution, full_inclusion_exclusion_union, monte_carlo_union, CountDistribution,
    MonteCarloEstimate,
};
pub use screening::{
    binomial_moments, build_graph, enumerate_tuples, screened_union, IntersectionGraph,
    MomentVector, TupleLedger, UnionResult,
};
