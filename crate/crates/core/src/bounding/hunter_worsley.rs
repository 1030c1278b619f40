use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{EmptinessMode, EventBox};
use crate::measure::ProductMeasure;
use crate::screening::screened_union;

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Hunter–Worsley upper bound on the union: `S_1` minus the weight of a
/// maximum spanning tree of the complete graph whose edge `(i, j)` weighs
/// `P(A_i A_j)`. Pairs missing from `pairwise` weigh zero, so a disconnected
/// support yields a spanning forest.
pub fn hunter_worsley_upper(s1: f64, pairwise: &BTreeMap<(usize, usize), f64>, n_events: usize) -> Result<f64> {
    let mut edges = Vec::with_capacity(pairwise.len());
    for (&(i, j), &w) in pairwise {
        if i >= n_events || j >= n_events || i == j {
            return Err(Error::input(format!("pair ({i}, {j}) is not valid for {n_events} events")));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::input(format!("pair probability {w} outside [0, 1]")));
        }
        if w > 0.0 {
            edges.push((w, i.min(j), i.max(j)));
        }
    }
    // heaviest first; ties by index for a deterministic tree
    edges.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut forest = DisjointSet::new(n_events);
    let mut weight = 0.0;
    for (w, i, j) in edges {
        if forest.union(i, j) {
            weight += w;
        }
    }
    Ok(s1 - weight)
}

/// Hunter–Worsley bound with `S_1` and the pair probabilities taken from
/// the screened ledger.
pub fn hunter_worsley_from_boxes(boxes: &[EventBox], measure: &ProductMeasure, mode: EmptinessMode) -> Result<f64> {
    let union = screened_union(boxes, measure, mode)?;
    let mut s1 = 0.0;
    for e in union.ledger.order(1) {
        s1 += measure.box_probability(&e.intersection)?;
    }
    let mut pairwise = BTreeMap::new();
    for e in union.ledger.order(2) {
        pairwise.insert((e.indices[0], e.indices[1]), measure.box_probability(&e.intersection)?);
    }
    hunter_worsley_upper(s1, &pairwise, boxes.len())
}
