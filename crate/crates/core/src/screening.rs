//! Pruned inclusion–exclusion over hyperrectangle events.
//!
//! Pairwise vertex comparison gives the intersection graph. Axis-aligned
//! boxes have the Helly property (a family meets iff every pair meets), so
//! the nonempty `k`-tuples are exactly the `k`-cliques of that graph. They
//! are enumerated by lexicographic clique extension and each candidate is
//! confirmed by the vertex test on its intersection box.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{intersect, meet_vertices, vertices_nonempty, EmptinessMode, EventBox};
use crate::measure::ProductMeasure;

/// Vertices are events, edges join events whose pairwise intersection is
/// nonempty under the chosen mode.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionGraph {
    labels: Vec<String>,
    adjacency: Vec<Vec<bool>>,
    mode: EmptinessMode,
}

impl IntersectionGraph {
    /// Graph on `labels.len()` vertices from an explicit edge list.
    pub fn from_edges(labels: Vec<String>, edges: &[(usize, usize)], mode: EmptinessMode) -> Result<Self> {
        let n = labels.len();
        let mut adjacency = vec![vec![false; n]; n];
        for &(i, j) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::input(format!("invalid edge ({i}, {j}) for {n} vertices")));
            }
            adjacency[i][j] = true;
            adjacency[j][i] = true;
        }
        Ok(IntersectionGraph { labels, adjacency, mode })
    }

    pub fn n_events(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mode(&self) -> EmptinessMode {
        self.mode
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_events();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adjacency[i][j])
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Number of `k`-cliques for `k = 1, 2, ...` up to the clique number.
    /// Uses the graph alone, never the boxes.
    pub fn clique_counts(&self) -> Vec<usize> {
        let n = self.n_events();
        let mut counts = Vec::new();
        let mut level: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        while !level.is_empty() {
            counts.push(level.len());
            let mut next = Vec::new();
            for clique in &level {
                let last = *clique.last().unwrap();
                for j in (last + 1)..n {
                    if clique.iter().all(|&v| self.adjacency[v][j]) {
                        let mut c = clique.clone();
                        c.push(j);
                        next.push(c);
                    }
                }
            }
            level = next;
        }
        counts
    }

    /// Size of the largest clique (Bron–Kerbosch with pivoting).
    pub fn clique_number(&self) -> usize {
        let mut best = 0;
        let p: Vec<usize> = (0..self.n_events()).collect();
        self.bron_kerbosch(0, p, Vec::new(), &mut best);
        best
    }

    fn bron_kerbosch(&self, r: usize, p: Vec<usize>, x: Vec<usize>, best: &mut usize) {
        if p.is_empty() {
            if x.is_empty() {
                *best = (*best).max(r);
            }
            return;
        }
        if r + p.len() <= *best {
            return;
        }
        let pivot = p
            .iter()
            .chain(&x)
            .copied()
            .max_by_key(|&u| p.iter().filter(|&&v| self.adjacency[u][v]).count())
            .unwrap();
        let mut p = p;
        let mut x = x;
        let candidates: Vec<usize> = p.iter().copied().filter(|&v| !self.adjacency[pivot][v]).collect();
        for v in candidates {
            let np = p.iter().copied().filter(|&u| self.adjacency[v][u]).collect();
            let nx = x.iter().copied().filter(|&u| self.adjacency[v][u]).collect();
            self.bron_kerbosch(r + 1, np, nx, best);
            p.retain(|&u| u != v);
            x.push(v);
        }
    }

    /// Graphviz rendering, vertices labelled by event id.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph intersections {\n");
        for label in &self.labels {
            let _ = writeln!(out, "  \"{}\";", escape_dot(label));
        }
        for (i, j) in self.edges() {
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\";",
                escape_dot(&self.labels[i]),
                escape_dot(&self.labels[j])
            );
        }
        out.push_str("}\n");
        out
    }
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn check_dims(boxes: &[EventBox]) -> Result<()> {
    if let Some(first) = boxes.first() {
        let n = first.dim();
        if let Some(b) = boxes.iter().find(|b| b.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: b.dim() });
        }
    }
    Ok(())
}

pub fn build_graph(boxes: &[EventBox], mode: EmptinessMode) -> Result<IntersectionGraph> {
    check_dims(boxes)?;
    let n = boxes.len();
    let mut adjacency = vec![vec![false; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (l, u) = meet_vertices(&[&boxes[i], &boxes[j]])?;
            if vertices_nonempty(&l, &u, mode) {
                adjacency[i][j] = true;
                adjacency[j][i] = true;
            }
        }
    }
    Ok(IntersectionGraph {
        labels: boxes.iter().map(|b| b.id().to_string()).collect(),
        adjacency,
        mode,
    })
}

/// A surviving tuple: event indices in increasing order and their common box.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleEntry {
    pub indices: Vec<usize>,
    pub intersection: EventBox,
}

/// Nonempty tuples grouped by order; `order(k)` lists the `k`-tuples in
/// lexicographic order of indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TupleLedger {
    orders: Vec<Vec<TupleEntry>>,
}

impl TupleLedger {
    /// Entries of order `k` (1-based). Empty beyond the highest order.
    pub fn order(&self, k: usize) -> &[TupleEntry] {
        if k == 0 {
            return &[];
        }
        self.orders.get(k - 1).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Highest order with at least one entry.
    pub fn max_order(&self) -> usize {
        self.orders.iter().rposition(|o| !o.is_empty()).map_or(0, |i| i + 1)
    }

    pub fn total_terms(&self) -> usize {
        self.orders.iter().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TupleEntry> {
        self.orders.iter().flatten()
    }

    /// The restricted inclusion–exclusion sums `S'_1, S'_2, ...`, one per
    /// order present, each summed in ledger order.
    pub fn order_sums(&self, measure: &ProductMeasure) -> Result<Vec<f64>> {
        self.orders
            .iter()
            .map(|entries| {
                let mut acc = NeumaierSum::default();
                for e in entries {
                    acc.add(measure.box_probability(&e.intersection)?);
                }
                Ok(acc.total())
            })
            .collect()
    }
}

/// One candidate tuple as the screening table shows it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenRow {
    pub indices: Vec<usize>,
    pub label: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nonempty: bool,
}

pub fn enumerate_tuples(
    boxes: &[EventBox],
    graph: &IntersectionGraph,
    mode: EmptinessMode,
    max_order: usize,
) -> Result<TupleLedger> {
    enumerate_inner(boxes, graph, mode, max_order, None)
}

fn enumerate_inner(
    boxes: &[EventBox],
    graph: &IntersectionGraph,
    mode: EmptinessMode,
    max_order: usize,
    mut trace: Option<&mut Vec<Vec<ScreenRow>>>,
) -> Result<TupleLedger> {
    check_dims(boxes)?;
    let n = boxes.len();
    if graph.n_events() != n {
        return Err(Error::input(format!(
            "graph has {} vertices but {} boxes were given",
            graph.n_events(),
            n
        )));
    }
    let max_order = max_order.min(n);
    let mut orders: Vec<Vec<TupleEntry>> = Vec::new();
    if max_order == 0 {
        return Ok(TupleLedger { orders });
    }
    orders.push(
        boxes
            .iter()
            .enumerate()
            .map(|(i, b)| TupleEntry { indices: vec![i], intersection: b.clone() })
            .collect(),
    );
    for _ in 2..=max_order {
        let prev = orders.last().unwrap();
        let mut next = Vec::new();
        let mut rows = Vec::new();
        for entry in prev {
            let last = *entry.indices.last().unwrap();
            for j in (last + 1)..n {
                if !entry.indices.iter().all(|&v| graph.adjacent(v, j)) {
                    continue;
                }
                let (l, u) = meet_vertices(&[&entry.intersection, &boxes[j]])?;
                let ok = vertices_nonempty(&l, &u, mode);
                let mut indices = entry.indices.clone();
                indices.push(j);
                if trace.is_some() {
                    rows.push(ScreenRow {
                        indices: indices.clone(),
                        label: format!("{}{}", entry.intersection.id(), boxes[j].id()),
                        lower: l,
                        upper: u,
                        nonempty: ok,
                    });
                }
                if ok {
                    let inter = intersect(&[&entry.intersection, &boxes[j]])?
                        .expect("vertex test passed so the closed intersection exists");
                    next.push(TupleEntry { indices, intersection: inter });
                }
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(rows);
        }
        if next.is_empty() {
            break;
        }
        orders.push(next);
    }
    Ok(TupleLedger { orders })
}

/// Candidate rows per order `k >= 2`, the way a hand screening lists them:
/// every pair at order 2, then the clique extensions of the surviving
/// tuples at each higher order.
pub fn screening_table(boxes: &[EventBox], mode: EmptinessMode) -> Result<Vec<Vec<ScreenRow>>> {
    let graph = build_graph(boxes, mode)?;
    let n = boxes.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (lower, upper) = meet_vertices(&[&boxes[i], &boxes[j]])?;
            pairs.push(ScreenRow {
                indices: vec![i, j],
                label: format!("{}{}", boxes[i].id(), boxes[j].id()),
                nonempty: vertices_nonempty(&lower, &upper, mode),
                lower,
                upper,
            });
        }
    }
    let mut trace = Vec::new();
    enumerate_inner(boxes, &graph, mode, n, Some(&mut trace))?;
    let mut out = vec![pairs];
    // order 2 comes from the full pair scan above
    out.extend(trace.into_iter().skip(1).filter(|rows| !rows.is_empty()));
    Ok(out)
}

/// Outcome of the pruned inclusion–exclusion.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionResult {
    /// Exact union probability.
    pub q: f64,
    /// Summands kept, order 1 included.
    pub terms_used: usize,
    /// `2^N - 1`, saturating at `u64::MAX`.
    pub terms_full: u64,
    pub ledger: TupleLedger,
}

pub(crate) fn full_term_count(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn screened_union(boxes: &[EventBox], measure: &ProductMeasure, mode: EmptinessMode) -> Result<UnionResult> {
    if let Some(b) = boxes.first() {
        measure.check_dim(b.dim())?;
    }
    let graph = build_graph(boxes, mode)?;
    let ledger = enumerate_tuples(boxes, &graph, mode, boxes.len())?;
    let sums = ledger.order_sums(measure)?;
    let q = alternating_sum(&sums);
    Ok(UnionResult {
        q,
        terms_used: ledger.total_terms(),
        terms_full: full_term_count(boxes.len()),
        ledger,
    })
}

fn alternating_sum(sums: &[f64]) -> f64 {
    let mut acc = NeumaierSum::default();
    for (k, s) in sums.iter().enumerate() {
        acc.add(if k % 2 == 0 { *s } else { -*s });
    }
    acc.total()
}

/// Binomial moments `S_1..S_m` of the number of occurring events, with the
/// union probability `Q` when known. `S_0 = 1` by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    n_events: usize,
    s: Vec<f64>,
    q: Option<f64>,
}

impl MomentVector {
    pub fn new(n_events: usize, s: Vec<f64>, q: Option<f64>) -> Result<Self> {
        if s.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::input("binomial moments must be finite and nonnegative"));
        }
        if let Some(q) = q {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::input(format!("union probability {q} outside [0, 1]")));
            }
        }
        Ok(MomentVector { n_events, s, q })
    }

    pub fn n_events(&self) -> usize {
        self.n_events
    }

    /// Highest moment order carried.
    pub fn m(&self) -> usize {
        self.s.len()
    }

    /// `S_k`, with `S_0 = 1`. Panics if `k > m`.
    pub fn s(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.s[k - 1]
        }
    }

    /// `S_1..S_m`.
    pub fn moments(&self) -> &[f64] {
        &self.s
    }

    pub fn q(&self) -> Option<f64> {
        self.q
    }

    /// The first `m` moments only.
    pub fn truncated(&self, m: usize) -> Result<MomentVector> {
        if m > self.m() {
            return Err(Error::input(format!("requested m = {m} but only {} moments are known", self.m())));
        }
        Ok(MomentVector { n_events: self.n_events, s: self.s[..m].to_vec(), q: self.q })
    }
}

/// `S_1..S_m` from the screened ledger and `Q` from the full pruned sum.
/// Orders above the largest clique (and above `N`) contribute zero.
pub fn binomial_moments(
    boxes: &[EventBox],
    measure: &ProductMeasure,
    mode: EmptinessMode,
    m: usize,
) -> Result<MomentVector> {
    let union = screened_union(boxes, measure, mode)?;
    let sums = union.ledger.order_sums(measure)?;
    let s = (1..=m).map(|k| sums.get(k - 1).copied().unwrap_or(0.0)).collect();
    MomentVector::new(boxes.len(), s, Some(union.q.clamp(0.0, 1.0)))
}

/// Compensated summation; the order of `add` calls fixes the result.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(id: &str, l: &[f64], u: &[f64]) -> EventBox {
        EventBox::new(id, l.to_vec(), u.to_vec()).unwrap()
    }

    fn example1() -> (Vec<EventBox>, ProductMeasure) {
        (
            vec![
                bx("A1", &[5., 6.], &[9., 9.]),
                bx("A2", &[2., 4.], &[6., 7.]),
                bx("A3", &[1., 3.], &[4., 8.]),
                bx("A4", &[3., 2.], &[7., 10.]),
                bx("A5", &[0., 1.], &[10., 5.]),
            ],
            ProductMeasure::uniform(&[0.; 2], &[10.; 2]).unwrap(),
        )
    }

    fn example2() -> (Vec<EventBox>, ProductMeasure) {
        (
            vec![
                bx("A1", &[0., 0., 0.], &[2., 2., 2.]),
                bx("A2", &[3., 1., 3.], &[5., 3., 5.]),
                bx("A3", &[1., 3., 3.], &[3., 5., 5.]),
                bx("A4", &[4., 4., 4.], &[5., 5., 5.]),
                bx("A5", &[2., 2., 2.], &[3., 3., 4.]),
                bx("A6", &[1., 4., 1.], &[2., 5., 2.]),
                bx("A7", &[4., 1., 4.], &[5., 2., 5.]),
            ],
            ProductMeasure::uniform(&[0.; 3], &[5.; 3]).unwrap(),
        )
    }

    const PM: EmptinessMode = EmptinessMode::PositiveMeasure;

    #[test]
    fn example1_graph() {
        let (boxes, _) = example1();
        let g = build_graph(&boxes, PM).unwrap();
        let expected: Vec<(usize, usize)> = (0..5)
            .flat_map(|i| ((i + 1)..5).map(move |j| (i, j)))
            .filter(|&p| p != (0, 2) && p != (0, 4))
            .collect();
        assert_eq!(g.edges(), expected);
        assert_eq!(g.clique_counts(), vec![5, 8, 5, 1]);
        assert_eq!(g.clique_number(), 4);
    }

    #[test]
    fn example2_graph() {
        let (boxes, _) = example2();
        let g = build_graph(&boxes, PM).unwrap();
        assert_eq!(g.edges(), vec![(1, 6)]);
        assert_eq!(g.clique_number(), 2);
    }

    #[test]
    fn single_box_graph() {
        let g = build_graph(&[bx("B", &[0.], &[1.])], PM).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.clique_number(), 1);
        assert_eq!(build_graph(&[], PM).unwrap().clique_number(), 0);
    }

    #[test]
    fn example1_tuples() {
        let (boxes, _) = example1();
        let g = build_graph(&boxes, PM).unwrap();
        let ledger = enumerate_tuples(&boxes, &g, PM, 10).unwrap();
        let triples: Vec<&str> = ledger.order(3).iter().map(|e| e.intersection.id()).collect();
        assert_eq!(triples, ["A1A2A4", "A2A3A4", "A2A3A5", "A2A4A5", "A3A4A5"]);
        let quad = &ledger.order(4)[0];
        assert_eq!(ledger.order(4).len(), 1);
        assert_eq!(quad.indices, vec![1, 2, 3, 4]);
        assert_eq!(quad.intersection.lower(), &[3., 4.]);
        assert_eq!(quad.intersection.upper(), &[4., 5.]);
        assert!(ledger.order(5).is_empty());
        assert_eq!(ledger.max_order(), 4);
    }

    #[test]
    fn example2_has_no_triples() {
        let (boxes, _) = example2();
        let g = build_graph(&boxes, PM).unwrap();
        let ledger = enumerate_tuples(&boxes, &g, PM, 3).unwrap();
        assert_eq!(ledger.order(2).len(), 1);
        assert!(ledger.order(3).is_empty());
    }

    #[test]
    fn union_term_counts() {
        let (b1, m1) = example1();
        let u1 = screened_union(&b1, &m1, PM).unwrap();
        assert_eq!((u1.terms_used, u1.terms_full), (19, 31));

        let (b2, m2) = example2();
        let u2 = screened_union(&b2, &m2, PM).unwrap();
        assert_eq!((u2.terms_used, u2.terms_full), (8, 127));
        assert!((u2.q - 28.0 / 125.0).abs() < 1e-15);
    }

    #[test]
    fn single_box_union() {
        let m = ProductMeasure::uniform(&[0.0], &[4.0]).unwrap();
        let u = screened_union(&[bx("B", &[1.], &[2.])], &m, PM).unwrap();
        assert_eq!(u.q, 0.25);
        assert_eq!(u.terms_used, 1);
    }

    #[test]
    fn moments_of_examples() {
        let (b2, m2) = example2();
        let mv = binomial_moments(&b2, &m2, PM, 2).unwrap();
        assert!((mv.s(1) - 29.0 / 125.0).abs() < 1e-15);
        assert!((mv.s(2) - 1.0 / 125.0).abs() < 1e-15);
        assert_eq!(mv.s(0), 1.0);

        let (b1, m1) = example1();
        let mv = binomial_moments(&b1, &m1, PM, 1).unwrap();
        assert!((mv.s(1) - 1.11).abs() < 1e-14);
    }

    #[test]
    fn no_events() {
        let m = ProductMeasure::uniform(&[0.0], &[1.0]).unwrap();
        let mv = binomial_moments(&[], &m, PM, 2).unwrap();
        assert_eq!(mv.moments(), &[0.0, 0.0]);
        assert_eq!(mv.q(), Some(0.0));
    }

    #[test]
    fn huge_term_count_saturates() {
        assert_eq!(full_term_count(63), (1u64 << 63) - 1);
        assert_eq!(full_term_count(64), u64::MAX);
        assert_eq!(full_term_count(0), 0);
    }

    #[test]
    fn dot_export() {
        let (boxes, _) = example2();
        let dot = build_graph(&boxes, PM).unwrap().to_dot();
        assert!(dot.starts_with("graph intersections {"));
        assert!(dot.contains("\"A2\" -- \"A7\";"));
        assert_eq!(dot.matches("--").count(), 1);
    }

    #[test]
    fn screening_table_rows() {
        let (boxes, _) = example1();
        let table = screening_table(&boxes, PM).unwrap();
        assert_eq!(table.len(), 3);
        assert_eq!(table[0].len(), 10);
        assert_eq!(table[1].len(), 5);
        assert_eq!(table[2].len(), 1);
        assert_eq!(table[1][0].label, "A1A2A4");
    }

    #[test]
    fn graph_size_mismatch() {
        let (boxes, _) = example1();
        let g = build_graph(&boxes[..3], PM).unwrap();
        assert!(enumerate_tuples(&boxes, &g, PM, 3).is_err());
    }
}
