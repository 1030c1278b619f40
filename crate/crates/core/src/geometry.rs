//! Hyperrectangle events and the vertex-comparison emptiness test.
//!
//! A box is stored as its lower and upper vertex; the `2^n` other corners
//! are never needed. Two boxes (or any tuple of boxes) intersect iff in
//! every coordinate the largest lower end does not exceed the smallest
//! upper end.

use std::fmt;

use crate::error::{Error, Result};

/// An axis-aligned box `{z : lower <= z <= upper}` in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventBox {
    id: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// How the vertex comparison treats touching boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EmptinessMode {
    /// Closed sets: `max lower <= min upper` in every coordinate.
    Closed,
    /// Positive Lebesgue volume: `max lower < min upper` in every
    /// coordinate. The right notion under continuous distributions.
    #[default]
    PositiveMeasure,
}

impl EventBox {
    pub fn new(id: impl Into<String>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if lower.is_empty() {
            return Err(Error::input(format!("box {id}: dimension must be at least 1")));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        for (k, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::input(format!("box {id}: non-finite coordinate {k}")));
            }
            if l > u {
                return Err(Error::input(format!(
                    "box {id}: lower {l} exceeds upper {u} in coordinate {k}"
                )));
            }
        }
        Ok(EventBox { id, lower, upper })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Lebesgue volume; zero for degenerate boxes.
    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    /// Intersection with another box, or `None` when some coordinate has an
    /// empty overlap. The id is the concatenation `self.id + other.id`.
    pub fn intersect(&self, other: &EventBox) -> Result<Option<EventBox>> {
        intersect(&[self, other])
    }
}

impl fmt::Display for EventBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.id, format_vertices(&self.lower, &self.upper))
    }
}

/// Formats a vertex pair the way boxes are written by hand: `[(5, 6), (9, 9)]`.
pub fn format_vertices(lower: &[f64], upper: &[f64]) -> String {
    fn tuple(v: &[f64]) -> String {
        let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
        format!("({})", parts.join(", "))
    }
    format!("[{}, {}]", tuple(lower), tuple(upper))
}

/// Coordinate-wise max of lowers and min of uppers, without any emptiness
/// decision. The returned "vertices" may be inverted.
pub fn meet_vertices<B: AsRef<EventBox>>(boxes: &[B]) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = boxes
        .first()
        .ok_or_else(|| Error::input("intersection of an empty list of boxes"))?
        .as_ref();
    let n = first.dim();
    let mut lower = first.lower.clone();
    let mut upper = first.upper.clone();
    for b in &boxes[1..] {
        let b = b.as_ref();
        if b.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.dim() });
        }
        for k in 0..n {
            lower[k] = lower[k].max(b.lower[k]);
            upper[k] = upper[k].min(b.upper[k]);
        }
    }
    Ok((lower, upper))
}

/// Intersects a nonempty list of boxes. Returns `None` when some coordinate
/// has `max lower > min upper`; the result may be degenerate otherwise.
pub fn intersect<B: AsRef<EventBox>>(boxes: &[B]) -> Result<Option<EventBox>> {
    let (lower, upper) = meet_vertices(boxes)?;
    if lower.iter().zip(&upper).any(|(l, u)| l > u) {
        return Ok(None);
    }
    let id: String = boxes.iter().map(|b| b.as_ref().id.as_str()).collect();
    Ok(Some(EventBox { id, lower, upper }))
}

/// Vertex-comparison test on a vertex pair that may be inverted.
pub fn vertices_nonempty(lower: &[f64], upper: &[f64], mode: EmptinessMode) -> bool {
    match mode {
        EmptinessMode::Closed => lower.iter().zip(upper).all(|(l, u)| l <= u),
        EmptinessMode::PositiveMeasure => lower.iter().zip(upper).all(|(l, u)| l < u),
    }
}

pub fn is_nonempty(b: Option<&EventBox>, mode: EmptinessMode) -> bool {
    b.is_some_and(|b| vertices_nonempty(&b.lower, &b.upper, mode))
}

impl AsRef<EventBox> for EventBox {
    fn as_ref(&self) -> &EventBox {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(id: &str, l: &[f64], u: &[f64]) -> EventBox {
        EventBox::new(id, l.to_vec(), u.to_vec()).unwrap()
    }

    #[test]
    fn pair_from_first_example() {
        let a1 = bx("A1", &[5., 6.], &[9., 9.]);
        let a2 = bx("A2", &[2., 4.], &[6., 7.]);
        let r = intersect(&[&a1, &a2]).unwrap().unwrap();
        assert_eq!(r.id(), "A1A2");
        assert_eq!(r.lower(), &[5., 6.]);
        assert_eq!(r.upper(), &[6., 7.]);
    }

    #[test]
    fn pair_from_second_example() {
        let a2 = bx("A2", &[3., 1., 3.], &[5., 3., 5.]);
        let a7 = bx("A7", &[4., 1., 4.], &[5., 2., 5.]);
        let r = intersect(&[&a2, &a7]).unwrap().unwrap();
        assert_eq!(r.lower(), &[4., 1., 4.]);
        assert_eq!(r.upper(), &[5., 2., 5.]);
        assert!(is_nonempty(Some(&r), EmptinessMode::PositiveMeasure));
    }

    #[test]
    fn single_box_is_identity() {
        let b = bx("B", &[0., 1.], &[2., 3.]);
        assert_eq!(intersect(&[&b]).unwrap().unwrap(), b);
    }

    #[test]
    fn point_box_depends_on_mode() {
        let p = bx("P", &[2., 2., 2.], &[2., 2., 2.]);
        assert!(!is_nonempty(Some(&p), EmptinessMode::PositiveMeasure));
        assert!(is_nonempty(Some(&p), EmptinessMode::Closed));
    }

    #[test]
    fn inverted_meet_is_empty_in_both_modes() {
        let a1 = bx("A1", &[5., 6.], &[9., 9.]);
        let a3 = bx("A3", &[1., 3.], &[4., 8.]);
        let (l, u) = meet_vertices(&[&a1, &a3]).unwrap();
        assert_eq!((l.as_slice(), u.as_slice()), (&[5., 6.][..], &[4., 8.][..]));
        assert!(intersect(&[&a1, &a3]).unwrap().is_none());
        assert!(!is_nonempty(None, EmptinessMode::Closed));
        assert!(!vertices_nonempty(&l, &u, EmptinessMode::Closed));
        assert!(!vertices_nonempty(&l, &u, EmptinessMode::PositiveMeasure));
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(EventBox::new("x", vec![], vec![]).is_err());
        assert!(EventBox::new("x", vec![1.0], vec![0.0]).is_err());
        assert!(matches!(
            EventBox::new("x", vec![1.0], vec![2.0, 3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(EventBox::new("x", vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn dimension_mismatch_in_intersect() {
        let a = bx("a", &[0.], &[1.]);
        let b = bx("b", &[0., 0.], &[1., 1.]);
        assert!(matches!(intersect(&[&a, &b]), Err(Error::DimensionMismatch { .. })));
        assert!(intersect::<&EventBox>(&[]).is_err());
    }

    fn arb_box(n: usize) -> impl Strategy<Value = EventBox> {
        proptest::collection::vec((0u8..8, 0u8..8), n).prop_map(|c| {
            let lower = c.iter().map(|&(a, b)| a.min(b) as f64).collect();
            let upper = c.iter().map(|&(a, b)| a.max(b) as f64).collect();
            EventBox::new("b", lower, upper).unwrap()
        })
    }

    proptest! {
        #[test]
        fn positive_measure_iff_positive_volume(a in arb_box(3), b in arb_box(3)) {
            let r = intersect(&[&a, &b]).unwrap();
            let vol: f64 = (0..3)
                .map(|k| (a.upper()[k].min(b.upper()[k]) - a.lower()[k].max(b.lower()[k])).max(0.0))
                .product();
            prop_assert_eq!(is_nonempty(r.as_ref(), EmptinessMode::PositiveMeasure), vol > 0.0);
        }

        #[test]
        fn intersection_is_associative(a in arb_box(2), b in arb_box(2), c in arb_box(2)) {
            let all = meet_vertices(&[&a, &b, &c]).unwrap();
            let (l, u) = meet_vertices(&[&a, &b]).unwrap();
            // stepwise meet on raw vertices, inverted pairs included
            let stepped: (Vec<f64>, Vec<f64>) = (
                l.iter().zip(c.lower()).map(|(x, y)| x.max(*y)).collect(),
                u.iter().zip(c.upper()).map(|(x, y)| x.min(*y)).collect(),
            );
            prop_assert_eq!(&all, &stepped);
            if let Some(ab) = intersect(&[&a, &b]).unwrap() {
                let nested = intersect(&[&ab, &c]).unwrap();
                let flat = intersect(&[&a, &b, &c]).unwrap();
                prop_assert_eq!(nested.is_some(), flat.is_some());
                if let (Some(x), Some(y)) = (nested, flat) {
                    prop_assert_eq!(x.lower(), y.lower());
                    prop_assert_eq!(x.upper(), y.upper());
                }
            }
        }
    }
}
