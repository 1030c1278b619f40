//! Ground-truth engines independent of the screening path: brute-force
//! inclusion–exclusion over all `2^N - 1` subsets, an exact cell
//! decomposition of space along every box boundary, and hit-or-miss Monte
//! Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounding::binomial;
use crate::error::{Error, Result};
use crate::geometry::EventBox;
use crate::measure::ProductMeasure;
use crate::screening::NeumaierSum;

pub const FULL_IE_MAX_EVENTS: usize = 20;
pub const CELLS_MAX_EVENTS: usize = 12;
pub const CELLS_MAX_DIM: usize = 3;
/// Sample budget is split into this many independently seeded streams.
pub const MC_CHUNKS: u64 = 8;

fn check_inputs(boxes: &[EventBox], measure: &ProductMeasure) -> Result<()> {
    for b in boxes {
        measure.check_dim(b.dim())?;
    }
    Ok(())
}

/// Distribution of the number of occurring events, `p[i] = P(xi = i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    pub p: Vec<f64>,
}

impl CountDistribution {
    pub fn n_events(&self) -> usize {
        self.p.len() - 1
    }

    /// `P(xi >= 1)`.
    pub fn union(&self) -> f64 {
        self.at_least(1)
    }

    pub fn at_least(&self, r: usize) -> f64 {
        let mut acc = NeumaierSum::default();
        for &x in self.p.iter().skip(r) {
            acc.add(x);
        }
        acc.total()
    }

    pub fn exactly(&self, r: usize) -> f64 {
        self.p.get(r).copied().unwrap_or(0.0)
    }

    /// Binomial moment `E[C(xi, k)]`.
    pub fn binomial_moment(&self, k: usize) -> f64 {
        let mut acc = NeumaierSum::default();
        for (i, &x) in self.p.iter().enumerate() {
            acc.add(binomial(i, k) * x);
        }
        acc.total()
    }
}

/// Union probability by the unpruned inclusion–exclusion formula. Each of the
/// `2^N - 1` terms is evaluated, empty intersections simply contributing 0.
pub fn full_inclusion_exclusion_union(boxes: &[EventBox], measure: &ProductMeasure) -> Result<f64> {
    let n_events = boxes.len();
    if n_events > FULL_IE_MAX_EVENTS {
        return Err(Error::input(format!(
            "full inclusion-exclusion is capped at {FULL_IE_MAX_EVENTS} events, got {n_events}"
        )));
    }
    check_inputs(boxes, measure)?;
    let dim = measure.dim();
    let mut acc = NeumaierSum::default();
    let mut lower = vec![0.0; dim];
    let mut upper = vec![0.0; dim];
    for mask in 1u32..(1u32 << n_events) {
        lower.fill(f64::NEG_INFINITY);
        upper.fill(f64::INFINITY);
        for (i, b) in boxes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for k in 0..dim {
                    lower[k] = lower[k].max(b.lower()[k]);
                    upper[k] = upper[k].min(b.upper()[k]);
                }
            }
        }
        let p = measure.vertex_probability(&lower, &upper);
        acc.add(if mask.count_ones() % 2 == 1 { p } else { -p });
    }
    Ok(acc.total())
}

/// Exact `P(xi = i)` by sweeping the grid of cells cut out by all box
/// boundaries. Each cell's probability is a product of marginal interval
/// probabilities and every box either covers a cell or misses its interior.
pub fn exact_count_distribution(boxes: &[EventBox], measure: &ProductMeasure) -> Result<CountDistribution> {
    let n_events = boxes.len();
    let dim = measure.dim();
    if n_events > CELLS_MAX_EVENTS || dim > CELLS_MAX_DIM {
        return Err(Error::input(format!(
            "cell oracle is capped at {CELLS_MAX_EVENTS} events in dimension {CELLS_MAX_DIM}, \
             got {n_events} events in dimension {dim}"
        )));
    }
    check_inputs(boxes, measure)?;

    // per axis: cell edges including the two unbounded ends
    let edges: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let mut cuts: Vec<f64> = boxes.iter().flat_map(|b| [b.lower()[k], b.upper()[k]]).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut e = Vec::with_capacity(cuts.len() + 2);
            e.push(f64::NEG_INFINITY);
            e.extend(cuts);
            e.push(f64::INFINITY);
            e
        })
        .collect();
    let axis_probs: Vec<Vec<f64>> = edges
        .iter()
        .zip(measure.marginals())
        .map(|(e, m)| e.windows(2).map(|w| m.interval_probability(w[0], w[1])).collect())
        .collect();

    let mut acc = vec![NeumaierSum::default(); n_events + 1];
    let mut idx = vec![0usize; dim];
    loop {
        let prob: f64 = (0..dim).map(|k| axis_probs[k][idx[k]]).product();
        if prob > 0.0 {
            let count = boxes
                .iter()
                .filter(|b| {
                    (0..dim).all(|k| b.lower()[k] <= edges[k][idx[k]] && edges[k][idx[k] + 1] <= b.upper()[k])
                })
                .count();
            acc[count].add(prob);
        }
        // odometer over the cell grid
        let mut k = 0;
        loop {
            if k == dim {
                let p = acc.iter().map(NeumaierSum::total).collect();
                return Ok(CountDistribution { p });
            }
            idx[k] += 1;
            if idx[k] < axis_probs[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: u64,
}

/// Hit-or-miss estimate of the union probability with [`MC_CHUNKS`] streams.
pub fn monte_carlo_union(
    boxes: &[EventBox],
    measure: &ProductMeasure,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    monte_carlo_union_chunked(boxes, measure, samples, seed, MC_CHUNKS)
}

/// Chunk `c` draws from ChaCha8 seeded with `seed` on stream `c`, so the
/// result depends only on `(seed, chunks, samples)`, not on scheduling.
pub fn monte_carlo_union_chunked(
    boxes: &[EventBox],
    measure: &ProductMeasure,
    samples: u64,
    seed: u64,
    chunks: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 || chunks == 0 {
        return Err(Error::input("Monte Carlo needs at least one sample and one chunk"));
    }
    check_inputs(boxes, measure)?;
    let chunks = chunks.min(samples);
    let hits: u64 = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chunks)
            .map(|c| {
                let count = samples / chunks + u64::from(c < samples % chunks);
                scope.spawn(move || sample_chunk(boxes, measure, count, seed, c))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampling thread panicked")).sum()
    });
    let estimate = hits as f64 / samples as f64;
    Ok(MonteCarloEstimate {
        estimate,
        standard_error: (estimate * (1.0 - estimate) / samples as f64).sqrt(),
        samples,
    })
}

fn sample_chunk(boxes: &[EventBox], measure: &ProductMeasure, count: u64, seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut point = vec![0.0; measure.dim()];
    let mut hits = 0;
    for _ in 0..count {
        for (x, m) in point.iter_mut().zip(measure.marginals()) {
            *x = m.quantile(rng.random::<f64>());
        }
        let inside = boxes.iter().any(|b| {
            b.lower().iter().zip(b.upper()).zip(&point).all(|((l, u), x)| l <= x && x <= u)
        });
        hits += u64::from(inside);
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Marginal;

    fn bx(id: &str, l: &[f64], u: &[f64]) -> EventBox {
        EventBox::new(id, l.to_vec(), u.to_vec()).unwrap()
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

    #[test]
    fn example2_full_ie() {
        let (b, m) = example2();
        assert!((full_inclusion_exclusion_union(&b, &m).unwrap() - 28.0 / 125.0).abs() < 1e-15);
    }

    #[test]
    fn example2_cells() {
        let (b, m) = example2();
        let d = exact_count_distribution(&b, &m).unwrap();
        let expect = [97.0, 27.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for (got, e) in d.p.iter().zip(expect) {
            assert!((got - e / 125.0).abs() < 1e-15, "{:?}", d.p);
        }
        assert!((d.union() - 0.224).abs() < 1e-15);
        assert!((d.binomial_moment(1) - 29.0 / 125.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_cases() {
        let m = ProductMeasure::uniform(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(exact_count_distribution(&[], &m).unwrap().p, vec![1.0]);
        assert_eq!(full_inclusion_exclusion_union(&[], &m).unwrap(), 0.0);

        let one = [bx("B", &[0.0, 0.0], &[0.5, 0.5])];
        let d = exact_count_distribution(&one, &m).unwrap();
        assert_eq!(d.p, vec![0.75, 0.25]);
        assert_eq!(full_inclusion_exclusion_union(&one, &m).unwrap(), 0.25);

        let two = [bx("p", &[0.0, 0.0], &[0.5, 0.5]), bx("q", &[0.6, 0.6], &[1.0, 0.7])];
        let q = full_inclusion_exclusion_union(&two, &m).unwrap();
        assert!((q - (0.25 + 0.04)).abs() < 1e-15);
    }

    #[test]
    fn caps() {
        let m = ProductMeasure::uniform(&[0.0; 4], &[1.0; 4]).unwrap();
        let b = [bx("B", &[0.0; 4], &[1.0; 4])];
        assert!(matches!(exact_count_distribution(&b, &m), Err(Error::Input(_))));
        let m1 = ProductMeasure::uniform(&[0.0], &[1.0]).unwrap();
        let many: Vec<EventBox> = (0..21).map(|i| bx(&format!("b{i}"), &[0.0], &[0.5])).collect();
        assert!(full_inclusion_exclusion_union(&many, &m1).is_err());
        assert!(exact_count_distribution(&many[..13], &m1).is_err());
    }

    #[test]
    fn monte_carlo_edges() {
        let m = ProductMeasure::uniform(&[0.0], &[1.0]).unwrap();
        assert_eq!(monte_carlo_union(&[], &m, 1000, 1).unwrap().estimate, 0.0);
        let full = [bx("F", &[0.0], &[1.0])];
        assert_eq!(monte_carlo_union(&full, &m, 1000, 1).unwrap().estimate, 1.0);
        assert!(monte_carlo_union(&full, &m, 0, 1).is_err());
        let one = monte_carlo_union(&full, &m, 1, 1).unwrap();
        assert_eq!(one.samples, 1);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let (b, m) = example2();
        let a = monte_carlo_union(&b, &m, 20_000, 42).unwrap();
        let c = monte_carlo_union(&b, &m, 20_000, 42).unwrap();
        assert_eq!(a, c);
        let d = monte_carlo_union(&b, &m, 20_000, 43).unwrap();
        assert_ne!(a.estimate, d.estimate);
    }

    #[test]
    fn monte_carlo_agrees_with_exact_on_random_boxes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = ProductMeasure::new(vec![
            Marginal::uniform(0.0, 1.0).unwrap(),
            Marginal::piecewise(vec![0.0, 0.3, 1.0], vec![0.0, 0.6, 1.0]).unwrap(),
        ])
        .unwrap();
        for trial in 0..10 {
            let boxes: Vec<EventBox> = (0..4)
                .map(|i| {
                    let (a, b): (f64, f64) = (rng.random(), rng.random());
                    let (c, d): (f64, f64) = (rng.random(), rng.random());
                    bx(&format!("b{i}"), &[a.min(b), c.min(d)], &[a.max(b), c.max(d)])
                })
                .collect();
            let exact = exact_count_distribution(&boxes, &m).unwrap().union();
            let mc = monte_carlo_union(&boxes, &m, 50_000, trial).unwrap();
            let se = (exact * (1.0 - exact) / 50_000.0).sqrt().max(1e-12);
            assert!((mc.estimate - exact).abs() <= 4.0 * se, "trial {trial}: {mc:?} vs {exact}");
        }
    }
}
