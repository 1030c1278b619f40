#![allow(dead_code)]

use boxbound::{EventBox, ProductMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bx(id: &str, l: &[f64], u: &[f64]) -> EventBox {
    EventBox::new(id, l.to_vec(), u.to_vec()).unwrap()
}

pub fn example1() -> (Vec<EventBox>, ProductMeasure) {
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

pub fn example2() -> (Vec<EventBox>, ProductMeasure) {
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

pub struct Instance {
    pub boxes: Vec<EventBox>,
    pub measure: ProductMeasure,
}

/// Random boxes in `[0, 1]^n` under the uniform measure. Half the instances
/// snap coordinates to a coarse grid so that touching faces and degenerate
/// boxes show up.
pub fn random_instance(rng: &mut ChaCha8Rng, max_dim: usize, max_events: usize) -> Instance {
    let n = rng.random_range(1..=max_dim);
    let count = rng.random_range(1..=max_events);
    let grid = rng.random_bool(0.5);
    let coord = |rng: &mut ChaCha8Rng| -> f64 {
        if grid {
            rng.random_range(0..=8) as f64 / 8.0
        } else {
            rng.random::<f64>()
        }
    };
    let boxes = (0..count)
        .map(|i| {
            let mut lower = Vec::with_capacity(n);
            let mut upper = Vec::with_capacity(n);
            for _ in 0..n {
                let a = coord(rng);
                // widths biased upward so tuples overlap often
                let w = coord(rng).max(coord(rng)) * 0.7;
                lower.push(a * 0.7);
                upper.push((a * 0.7 + w).min(1.0));
            }
            EventBox::new(format!("E{i}"), lower, upper).unwrap()
        })
        .collect();
    Instance { boxes, measure: ProductMeasure::uniform(&vec![0.0; n], &vec![1.0; n]).unwrap() }
}

pub fn instances(seed: u64, count: usize, max_dim: usize, max_events: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_instance(&mut rng, max_dim, max_events)).collect()
}

/// Every index subset, checked directly with the vertex test on the full
/// tuple (no graph, no extension).
pub fn brute_force_tuples(boxes: &[EventBox], mode: boxbound::EmptinessMode) -> Vec<Vec<Vec<usize>>> {
    let n = boxes.len();
    let mut by_order = vec![Vec::new(); n];
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let members: Vec<&EventBox> = idx.iter().map(|&i| &boxes[i]).collect();
        let inter = boxbound::intersect(&members).unwrap();
        if idx.len() == 1 || boxbound::is_nonempty(inter.as_ref(), mode) {
            by_order[idx.len() - 1].push(idx);
        }
    }
    for order in &mut by_order {
        order.sort();
    }
    while by_order.last().is_some_and(Vec::is_empty) {
        by_order.pop();
    }
    by_order
}
