//! Python bindings for `boxbound`.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use boxbound::bounding::hunter_worsley_upper as hw_upper;
use boxbound::{BooleanSystem, BooleanTarget, EmptinessMode, Error, EventBox, Marginal, MomentVector, ProductMeasure};

fn to_py(e: Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse_mode(mode: &str) -> PyResult<EmptinessMode> {
    match mode {
        "closed" => Ok(EmptinessMode::Closed),
        "positive-measure" | "positive_measure" => Ok(EmptinessMode::PositiveMeasure),
        other => Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
}

/// Axis-aligned box given by its lower and upper vertex.
#[pyclass(name = "Box", module = "pyboxbound", from_py_object)]
#[derive(Clone)]
struct PyEventBox {
    inner: EventBox,
}

#[pymethods]
impl PyEventBox {
    #[new]
    fn new(id: String, lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        Ok(PyEventBox { inner: EventBox::new(id, lower, upper).map_err(to_py)? })
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id().to_string()
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.inner.lower().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.inner.upper().to_vec()
    }

    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    fn intersect(&self, other: &PyEventBox) -> PyResult<Option<PyEventBox>> {
        Ok(self.inner.intersect(&other.inner).map_err(to_py)?.map(|inner| PyEventBox { inner }))
    }

    fn __repr__(&self) -> String {
        format!("Box({})", self.inner)
    }
}

#[pyclass(name = "Marginal", module = "pyboxbound", from_py_object)]
#[derive(Clone)]
struct PyMarginal {
    inner: Marginal,
}

#[pymethods]
impl PyMarginal {
    #[staticmethod]
    fn uniform(a: f64, b: f64) -> PyResult<Self> {
        Ok(PyMarginal { inner: Marginal::uniform(a, b).map_err(to_py)? })
    }

    #[staticmethod]
    fn piecewise(knots: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        Ok(PyMarginal { inner: Marginal::piecewise(knots, values).map_err(to_py)? })
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }
}

/// Product of independent marginals.
#[pyclass(name = "Measure", module = "pyboxbound", from_py_object)]
#[derive(Clone)]
struct PyMeasure {
    inner: ProductMeasure,
}

#[pymethods]
impl PyMeasure {
    #[new]
    fn new(marginals: Vec<PyMarginal>) -> PyResult<Self> {
        let inner = ProductMeasure::new(marginals.into_iter().map(|m| m.inner).collect()).map_err(to_py)?;
        Ok(PyMeasure { inner })
    }

    #[staticmethod]
    fn uniform(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        Ok(PyMeasure { inner: ProductMeasure::uniform(&lower, &upper).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn box_probability(&self, b: &PyEventBox) -> PyResult<f64> {
        self.inner.box_probability(&b.inner).map_err(to_py)
    }
}

/// Binomial moments `S_1..S_m` with the optional union probability `q`.
#[pyclass(name = "Moments", module = "pyboxbound", from_py_object)]
#[derive(Clone)]
struct PyMoments {
    inner: MomentVector,
}

#[pymethods]
impl PyMoments {
    #[new]
    #[pyo3(signature = (n_events, s, q=None))]
    fn new(n_events: usize, s: Vec<f64>, q: Option<f64>) -> PyResult<Self> {
        Ok(PyMoments { inner: MomentVector::new(n_events, s, q).map_err(to_py)? })
    }

    #[getter]
    fn n_events(&self) -> usize {
        self.inner.n_events()
    }

    #[getter]
    fn s(&self) -> Vec<f64> {
        self.inner.moments().to_vec()
    }

    #[getter]
    fn q(&self) -> Option<f64> {
        self.inner.q()
    }

    fn __repr__(&self) -> String {
        format!("Moments(n_events={}, s={:?}, q={:?})", self.inner.n_events(), self.inner.moments(), self.inner.q())
    }
}

#[pyclass(name = "BoundPair", module = "pyboxbound", get_all, skip_from_py_object)]
struct PyBoundPair {
    lower: f64,
    upper: f64,
    method: String,
}

#[pymethods]
impl PyBoundPair {
    fn __repr__(&self) -> String {
        format!("BoundPair(lower={}, upper={}, method={:?})", self.lower, self.upper, self.method)
    }
}

impl From<boxbound::BoundPair> for PyBoundPair {
    fn from(b: boxbound::BoundPair) -> Self {
        PyBoundPair { lower: b.lower, upper: b.upper, method: b.method }
    }
}

#[pyclass(name = "IntersectionGraph", module = "pyboxbound", skip_from_py_object)]
struct PyGraph {
    inner: boxbound::IntersectionGraph,
}

#[pymethods]
impl PyGraph {
    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn clique_number(&self) -> usize {
        self.inner.clique_number()
    }

    fn clique_counts(&self) -> Vec<usize> {
        self.inner.clique_counts()
    }

    fn to_dot(&self) -> String {
        self.inner.to_dot()
    }
}

fn unwrap_boxes(boxes: Vec<PyEventBox>) -> Vec<EventBox> {
    boxes.into_iter().map(|b| b.inner).collect()
}

#[pyfunction]
fn intersect(boxes: Vec<PyEventBox>) -> PyResult<Option<PyEventBox>> {
    let boxes = unwrap_boxes(boxes);
    Ok(boxbound::intersect(&boxes).map_err(to_py)?.map(|inner| PyEventBox { inner }))
}

#[pyfunction]
#[pyo3(signature = (b, mode="positive-measure"))]
fn is_nonempty(b: Option<PyEventBox>, mode: &str) -> PyResult<bool> {
    Ok(boxbound::is_nonempty(b.as_ref().map(|b| &b.inner), parse_mode(mode)?))
}

#[pyfunction]
#[pyo3(signature = (boxes, mode="positive-measure"))]
fn build_graph(boxes: Vec<PyEventBox>, mode: &str) -> PyResult<PyGraph> {
    let inner = boxbound::build_graph(&unwrap_boxes(boxes), parse_mode(mode)?).map_err(to_py)?;
    Ok(PyGraph { inner })
}

/// Returns `(q, terms_used, terms_full)`.
#[pyfunction]
#[pyo3(signature = (boxes, measure, mode="positive-measure"))]
fn screened_union(boxes: Vec<PyEventBox>, measure: &PyMeasure, mode: &str) -> PyResult<(f64, usize, u64)> {
    let u = boxbound::screened_union(&unwrap_boxes(boxes), &measure.inner, parse_mode(mode)?).map_err(to_py)?;
    Ok((u.q, u.terms_used, u.terms_full))
}

#[pyfunction]
#[pyo3(signature = (boxes, measure, m, mode="positive-measure"))]
fn binomial_moments(boxes: Vec<PyEventBox>, measure: &PyMeasure, m: usize, mode: &str) -> PyResult<PyMoments> {
    let inner =
        boxbound::binomial_moments(&unwrap_boxes(boxes), &measure.inner, parse_mode(mode)?, m).map_err(to_py)?;
    Ok(PyMoments { inner })
}

#[pyfunction]
#[pyo3(signature = (moments, m, include_p0=true))]
fn union_bounds(moments: &PyMoments, m: usize, include_p0: bool) -> PyResult<PyBoundPair> {
    Ok(boxbound::union_bounds(&moments.inner, m, include_p0).map_err(to_py)?.into())
}

#[pyfunction]
fn atleast_r_bounds(moments: &PyMoments, m: usize, r: usize) -> PyResult<PyBoundPair> {
    Ok(boxbound::atleast_r_bounds(&moments.inner, m, r).map_err(to_py)?.into())
}

#[pyfunction]
fn exactly_r_bounds(moments: &PyMoments, m: usize, r: usize) -> PyResult<PyBoundPair> {
    Ok(boxbound::exactly_r_bounds(&moments.inner, m, r).map_err(to_py)?.into())
}

#[pyfunction]
fn q_atleast_bounds(moments: &PyMoments, m: usize, r: usize) -> PyResult<PyBoundPair> {
    Ok(boxbound::q_atleast_bounds(&moments.inner, m, r).map_err(to_py)?.into())
}

#[pyfunction]
fn q_exactly_bounds(moments: &PyMoments, m: usize, r: usize) -> PyResult<PyBoundPair> {
    Ok(boxbound::q_exactly_bounds(&moments.inner, m, r).map_err(to_py)?.into())
}

#[pyfunction]
fn hunter_worsley_upper(s1: f64, pairwise: BTreeMap<(usize, usize), f64>, n_events: usize) -> PyResult<f64> {
    hw_upper(s1, &pairwise, n_events).map_err(to_py)
}

/// `target` is one of "union", "atleast", "exactly".
#[pyfunction]
#[pyo3(signature = (boxes, measure, m, target="union", r=1, mode="positive-measure"))]
fn boolean_lp_bounds(
    boxes: Vec<PyEventBox>,
    measure: &PyMeasure,
    m: usize,
    target: &str,
    r: usize,
    mode: &str,
) -> PyResult<PyBoundPair> {
    let target = match target {
        "union" => BooleanTarget::Union,
        "atleast" => BooleanTarget::AtLeast(r),
        "exactly" => BooleanTarget::Exactly(r),
        other => return Err(PyValueError::new_err(format!("unknown target {other:?}"))),
    };
    let system =
        BooleanSystem::from_boxes(&unwrap_boxes(boxes), &measure.inner, parse_mode(mode)?, m).map_err(to_py)?;
    Ok(boxbound::boolean_lp_bounds(&system, target).map_err(to_py)?.into())
}

#[pyfunction]
fn full_inclusion_exclusion_union(boxes: Vec<PyEventBox>, measure: &PyMeasure) -> PyResult<f64> {
    boxbound::full_inclusion_exclusion_union(&unwrap_boxes(boxes), &measure.inner).map_err(to_py)
}

/// `[P(xi = 0), ..., P(xi = N)]`.
#[pyfunction]
fn exact_count_distribution(boxes: Vec<PyEventBox>, measure: &PyMeasure) -> PyResult<Vec<f64>> {
    Ok(boxbound::exact_count_distribution(&unwrap_boxes(boxes), &measure.inner).map_err(to_py)?.p)
}

/// Returns `(estimate, standard_error)`.
#[pyfunction]
#[pyo3(signature = (boxes, measure, samples=1_000_000, seed=0))]
fn monte_carlo_union(boxes: Vec<PyEventBox>, measure: &PyMeasure, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
    let e = boxbound::monte_carlo_union(&unwrap_boxes(boxes), &measure.inner, samples, seed).map_err(to_py)?;
    Ok((e.estimate, e.standard_error))
}

#[pymodule]
fn pyboxbound(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEventBox>()?;
    m.add_class::<PyMarginal>()?;
    m.add_class::<PyMeasure>()?;
    m.add_class::<PyMoments>()?;
    m.add_class::<PyBoundPair>()?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(intersect, m)?)?;
    m.add_function(wrap_pyfunction!(is_nonempty, m)?)?;
    m.add_function(wrap_pyfunction!(build_graph, m)?)?;
    m.add_function(wrap_pyfunction!(screened_union, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_moments, m)?)?;
    m.add_function(wrap_pyfunction!(union_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(atleast_r_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(exactly_r_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(q_atleast_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(q_exactly_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(hunter_worsley_upper, m)?)?;
    m.add_function(wrap_pyfunction!(boolean_lp_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(full_inclusion_exclusion_union, m)?)?;
    m.add_function(wrap_pyfunction!(exact_count_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo_union, m)?)?;
    Ok(())
}
