//! Product probability measures on `R^n` and box probabilities.
//!
//! With independent coordinates the probability of a box factorizes into
//! a product of one-dimensional interval probabilities `F_k(u_k) - F_k(l_k)`.

use crate::error::{Error, Result};
use crate::geometry::EventBox;

/// A continuous one-dimensional distribution given by its CDF.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    /// Uniform on `[a, b]`, `a < b`.
    UniformInterval { a: f64, b: f64 },
    /// Piecewise-linear CDF through `(knots[i], values[i])`. Zero below the
    /// first knot and one above the last.
    PiecewiseCdf { knots: Vec<f64>, values: Vec<f64> },
}

impl Marginal {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b - a > 0.0) {
            return Err(Error::input(format!("uniform marginal needs a < b, got [{a}, {b}]")));
        }
        Ok(Marginal::UniformInterval { a, b })
    }

    pub fn piecewise(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::input(
                "piecewise CDF needs at least two knots and one value per knot",
            ));
        }
        if knots.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::input("piecewise CDF has non-finite entries"));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("piecewise CDF knots must be strictly increasing"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::input("piecewise CDF values must be nondecreasing"));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 1.0 {
            return Err(Error::input("piecewise CDF values must start at 0 and end at 1"));
        }
        Ok(Marginal::PiecewiseCdf { knots, values })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::UniformInterval { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Marginal::PiecewiseCdf { knots, values } => {
                if x <= knots[0] {
                    return 0.0;
                }
                let last = knots.len() - 1;
                if x >= knots[last] {
                    return 1.0;
                }
                // first knot strictly greater than x; 1 <= i <= last
                let i = knots.partition_point(|&k| k <= x);
                let t = (x - knots[i - 1]) / (knots[i] - knots[i - 1]);
                (values[i - 1] + t * (values[i] - values[i - 1])).clamp(0.0, 1.0)
            }
        }
    }

    /// Inverse CDF for `u` in `[0, 1)`. On flat stretches of a piecewise CDF
    /// the left end of the stretch is returned.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Marginal::UniformInterval { a, b } => a + u * (b - a),
            Marginal::PiecewiseCdf { knots, values } => {
                // first segment whose right value exceeds u
                let i = values.partition_point(|&v| v <= u).clamp(1, knots.len() - 1);
                let dv = values[i] - values[i - 1];
                if dv <= 0.0 {
                    return knots[i - 1];
                }
                let t = (u - values[i - 1]) / dv;
                knots[i - 1] + t.clamp(0.0, 1.0) * (knots[i] - knots[i - 1])
            }
        }
    }

    /// `P(lo <= X <= hi)`; zero when `hi <= lo`.
    pub fn interval_probability(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        (self.cdf(hi) - self.cdf(lo)).max(0.0)
    }
}

pub fn cdf(marginal: &Marginal, x: f64) -> f64 {
    marginal.cdf(x)
}

/// Independent marginals, one per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasure {
    marginals: Vec<Marginal>,
}

impl ProductMeasure {
    pub fn new(marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::input("product measure needs at least one marginal"));
        }
        Ok(ProductMeasure { marginals })
    }

    /// Uniform distribution on the box `[lower, upper]`.
    pub fn uniform(lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        let marginals = lower
            .iter()
            .zip(upper)
            .map(|(&a, &b)| Marginal::uniform(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(marginals)
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    /// Every marginal here has a continuous CDF.
    pub fn is_continuous(&self) -> bool {
        true
    }

    pub fn box_probability(&self, b: &EventBox) -> Result<f64> {
        self.check_dim(b.dim())?;
        Ok(self.vertex_probability(b.lower(), b.upper()))
    }

    /// Probability of the box spanned by a (possibly inverted) vertex pair.
    /// Dimensions are not checked.
    pub(crate) fn vertex_probability(&self, lower: &[f64], upper: &[f64]) -> f64 {
        let mut p = 1.0;
        for ((m, &l), &u) in self.marginals.iter().zip(lower).zip(upper) {
            p *= m.interval_probability(l, u);
            if p == 0.0 {
                break;
            }
        }
        p
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: n });
        }
        Ok(())
    }
}

pub fn box_probability(b: &EventBox, measure: &ProductMeasure) -> Result<f64> {
    measure.box_probability(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_cdf_values() {
        let m = Marginal::uniform(0.0, 10.0).unwrap();
        assert_eq!(m.cdf(4.0), 0.4);
        assert_eq!(m.cdf(-1.0), 0.0);
        assert_eq!(m.cdf(11.0), 1.0);
    }

    #[test]
    fn piecewise_identity_on_unit_interval() {
        let m = Marginal::piecewise(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(m.cdf(0.25), 0.25);
        assert_eq!(m.cdf(-3.0), 0.0);
        assert_eq!(m.cdf(7.0), 1.0);
    }

    #[test]
    fn piecewise_interpolates_between_knots() {
        let m = Marginal::piecewise(vec![0.0, 1.0, 3.0], vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(m.cdf(0.5), 0.25);
        assert_eq!(m.cdf(1.0), 0.5);
        assert_eq!(m.cdf(2.0), 0.75);
        assert_eq!(m.quantile(0.75), 2.0);
        assert_eq!(m.quantile(0.25), 0.5);
    }

    #[test]
    fn piecewise_quantile_on_flat_stretch() {
        let m = Marginal::piecewise(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.5, 0.5, 1.0]).unwrap();
        assert_eq!(m.quantile(0.5), 2.0);
        assert_eq!(m.quantile(0.0), 0.0);
    }

    #[test]
    fn invalid_marginals() {
        assert!(Marginal::uniform(1.0, 1.0).is_err());
        assert!(Marginal::piecewise(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
        assert!(Marginal::piecewise(vec![0.0, 1.0], vec![0.1, 1.0]).is_err());
        assert!(Marginal::piecewise(vec![0.0, 1.0, 2.0], vec![0.0, 0.7, 0.6]).is_err());
        assert!(Marginal::piecewise(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn box_probabilities() {
        let m2 = ProductMeasure::uniform(&[0.0, 0.0], &[10.0, 10.0]).unwrap();
        let b = EventBox::new("A1", vec![5.0, 6.0], vec![9.0, 9.0]).unwrap();
        assert!((m2.box_probability(&b).unwrap() - 0.12).abs() < 1e-15);

        let m3 = ProductMeasure::uniform(&[0.0; 3], &[5.0; 3]).unwrap();
        let cube = EventBox::new("c", vec![4.0, 1.0, 4.0], vec![5.0, 2.0, 5.0]).unwrap();
        assert!((m3.box_probability(&cube).unwrap() - 1.0 / 125.0).abs() < 1e-15);

        let point = EventBox::new("p", vec![2.0; 3], vec![2.0; 3]).unwrap();
        assert_eq!(m3.box_probability(&point).unwrap(), 0.0);

        assert!(matches!(m2.box_probability(&cube), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn shrinking_never_increases(
            l in prop::collection::vec(-1.0f64..11.0, 2),
            w in prop::collection::vec(0.0f64..6.0, 2),
            shrink in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2),
        ) {
            let m = ProductMeasure::new(vec![
                Marginal::uniform(0.0, 10.0).unwrap(),
                Marginal::piecewise(vec![0.0, 2.0, 10.0], vec![0.0, 0.8, 1.0]).unwrap(),
            ]).unwrap();
            let u: Vec<f64> = l.iter().zip(&w).map(|(a, b)| a + b).collect();
            let outer = EventBox::new("o", l.clone(), u.clone()).unwrap();
            let il: Vec<f64> = (0..2).map(|k| l[k] + shrink[k].0 * w[k] * 0.5).collect();
            let iu: Vec<f64> = (0..2).map(|k| u[k] - shrink[k].1 * w[k] * 0.5).collect();
            let inner = EventBox::new("i", il, iu).unwrap();
            let po = m.box_probability(&outer).unwrap();
            let pi = m.box_probability(&inner).unwrap();
            prop_assert!(pi <= po + 1e-15);
            prop_assert!((0.0..=1.0).contains(&po));

            // factorization
            let per: f64 = (0..2)
                .map(|k| m.marginals()[k].cdf(u[k]) - m.marginals()[k].cdf(l[k]))
                .product();
            prop_assert!((per - po).abs() < 1e-15);
        }

        #[test]
        fn quantile_inverts_cdf(u in 0.0f64..1.0) {
            let m = Marginal::piecewise(vec![-1.0, 0.0, 4.0], vec![0.0, 0.3, 1.0]).unwrap();
            prop_assert!((m.cdf(m.quantile(u)) - u).abs() < 1e-12);
        }
    }
}
