//! The Boolean bounding problem over atoms.
//!
//! Unknowns are `x_J = P(exactly the events in J occur)` for every subset
//! `J` of the `N` events; constraints say that for every `|I| <= m` the
//! atoms containing `I` add up to `p_I = P(all events in I occur)`. The
//! `I = {}` row fixes the total mass to one.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{EmptinessMode, EventBox};
use crate::measure::ProductMeasure;
use crate::screening::{build_graph, enumerate_tuples};

use super::{min_max, BoundPair};

/// `2^N` unknowns; beyond this the dense formulation is not attempted.
pub const BOOLEAN_MAX_EVENTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BooleanTarget {
    Union,
    AtLeast(usize),
    Exactly(usize),
}

/// Intersection probabilities `p_I` for nonempty `I` with `|I| <= m`.
/// Subsets absent from the map have probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BooleanSystem {
    n_events: usize,
    m: usize,
    /// Keyed by bitmask of the events in `I`.
    p: BTreeMap<u32, f64>,
}

impl BooleanSystem {
    /// `p` maps sorted index lists `I` to `p_I`.
    pub fn new(n_events: usize, m: usize, p: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        if n_events > BOOLEAN_MAX_EVENTS {
            return Err(Error::input(format!(
                "Boolean LP supports at most {BOOLEAN_MAX_EVENTS} events, got {n_events}"
            )));
        }
        if m > n_events {
            return Err(Error::input(format!("m = {m} exceeds N = {n_events}")));
        }
        let mut masks = BTreeMap::new();
        for (set, prob) in p {
            if set.is_empty() || set.len() > m {
                return Err(Error::input(format!("subset {set:?} must have 1..={m} elements")));
            }
            let mut mask = 0u32;
            for &i in &set {
                if i >= n_events || mask & (1 << i) != 0 {
                    return Err(Error::input(format!("invalid subset {set:?}")));
                }
                mask |= 1 << i;
            }
            if !(0.0..=1.0).contains(&prob) {
                return Err(Error::input(format!("p{set:?} = {prob} outside [0, 1]")));
            }
            masks.insert(mask, prob);
        }
        let system = BooleanSystem { n_events, m, p: masks };
        system.check_monotone()?;
        Ok(system)
    }

    /// `p_I` from the screened tuple ledger; tuples pruned by screening get 0.
    pub fn from_boxes(boxes: &[EventBox], measure: &ProductMeasure, mode: EmptinessMode, m: usize) -> Result<Self> {
        if let Some(b) = boxes.first() {
            measure.check_dim(b.dim())?;
        }
        let graph = build_graph(boxes, mode)?;
        let ledger = enumerate_tuples(boxes, &graph, mode, m)?;
        let mut p = BTreeMap::new();
        for e in ledger.iter() {
            p.insert(e.indices.clone(), measure.box_probability(&e.intersection)?);
        }
        Self::new(boxes.len(), m, p)
    }

    pub fn n_events(&self) -> usize {
        self.n_events
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `p_I` for a bitmask `I`; `p_{} = 1`.
    pub fn probability(&self, mask: u32) -> f64 {
        if mask == 0 {
            1.0
        } else {
            self.p.get(&mask).copied().unwrap_or(0.0)
        }
    }

    fn check_monotone(&self) -> Result<()> {
        for (&mask, &prob) in &self.p {
            for i in 0..self.n_events {
                let bit = 1u32 << i;
                if mask & bit != 0 && mask != bit && self.probability(mask & !bit) < prob - 1e-12 {
                    return Err(Error::input(format!(
                        "intersection probabilities are not monotone at subset mask {mask:#b}"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn boolean_lp_bounds(system: &BooleanSystem, target: BooleanTarget) -> Result<BoundPair> {
    let n = system.n_events;
    let (method, wanted): (&str, Box<dyn Fn(u32) -> bool>) = match target {
        BooleanTarget::Union => ("boolean-union", Box::new(|j: u32| j != 0)),
        BooleanTarget::AtLeast(r) => {
            if r == 0 || r > n {
                return Err(Error::input(format!("r = {r} must lie in 1..={n}")));
            }
            ("boolean-atleast", Box::new(move |j: u32| j.count_ones() as usize >= r))
        }
        BooleanTarget::Exactly(r) => {
            if r > n {
                return Err(Error::input(format!("r = {r} must lie in 0..={n}")));
            }
            ("boolean-exactly", Box::new(move |j: u32| j.count_ones() as usize == r))
        }
    };

    let row_sets: Vec<u32> =
        (0u32..(1 << n)).filter(|i| i.count_ones() as usize <= system.m).collect();
    // an atom containing a zero-probability I is forced to zero
    let zero_sets: Vec<u32> = row_sets.iter().copied().filter(|&i| system.probability(i) == 0.0).collect();
    let atoms: Vec<u32> = (0u32..(1 << n))
        .filter(|&j| !zero_sets.iter().any(|&z| z & j == z))
        .collect();

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for &i in &row_sets {
        let row: Vec<f64> = atoms.iter().map(|&j| if i & j == i { 1.0 } else { 0.0 }).collect();
        let b = system.probability(i);
        if b == 0.0 && row.iter().all(|&a| a == 0.0) {
            continue;
        }
        rows.push(row);
        rhs.push(b);
    }
    let objective = atoms.iter().map(|&j| if wanted(j) { 1.0 } else { 0.0 }).collect();
    min_max(method, objective, rows, rhs)
}
