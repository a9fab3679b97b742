//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! graphs, scenarios and states use the same JSON documents as the CLI.

use std::collections::BTreeSet;
use std::path::PathBuf;

use klt_core::cyclic::{self, HJExpansion};
use klt_core::discrepancy::{self, Classification};
use klt_core::graph::{BlowUpStep, VertexId};
use klt_core::io::{self, StateDocument};
use klt_core::ledger::{self, ContractionData};
use klt_core::mmp::{self, EnumerationBudget};
use klt_core::rational::format_rational;
use klt_core::{DualGraph, Rational};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((*r.numer(), *r.denom()))
}

/// Accepts `int`, `Fraction` or a `"p/q"` string.
fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if let Ok(s) = obj.cast::<PyString>() {
        return io::parse_rational_arg(&s.to_cow()?).map_err(value_err);
    }
    let p: i128 = obj.getattr("numerator")?.extract()?;
    let q: i128 = obj.getattr("denominator")?.extract()?;
    if q == 0 {
        return Err(PyArithmeticError::new_err("zero denominator"));
    }
    Ok(Rational::new(p, q))
}

/// Dual graph of a singular point with its boundary branches.
#[pyclass(name = "Graph", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyGraph(DualGraph);

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::parse_graph(text).map(PyGraph).map_err(value_err)
    }

    #[staticmethod]
    fn chain(weights: Vec<u32>) -> PyResult<Self> {
        if weights.iter().any(|&w| w == 0) {
            return Err(PyValueError::new_err("weights must be positive"));
        }
        Ok(PyGraph(DualGraph::chain(&weights)))
    }

    #[staticmethod]
    fn empty() -> Self {
        PyGraph(DualGraph::empty())
    }

    fn to_json(&self) -> String {
        io::graph_to_json(&self.0)
    }

    /// Exceptional curves as `(id, weight)` pairs.
    fn exceptional(&self) -> Vec<(String, u32)> {
        self.0
            .vertices()
            .iter()
            .filter_map(|v| v.kind.weight().map(|w| (v.id.as_str().to_owned(), w)))
            .collect()
    }

    fn edges(&self) -> Vec<(String, String)> {
        self.0
            .edges()
            .map(|(a, b)| (a.as_str().to_owned(), b.as_str().to_owned()))
            .collect()
    }

    fn intersection_matrix(&self) -> Vec<Vec<i64>> {
        self.0.intersection_matrix().rows()
    }

    /// Blows up a curve, the node between two curves, or a smooth point of
    /// the empty graph.
    #[pyo3(signature = (vertex=None, edge=None, point=false))]
    fn blow_up(
        &self,
        vertex: Option<String>,
        edge: Option<(String, String)>,
        point: bool,
    ) -> PyResult<Self> {
        let step = match (vertex, edge, point) {
            (Some(v), None, false) => BlowUpStep::Vertex(VertexId::new(v)),
            (None, Some((a, b)), false) => BlowUpStep::Edge(VertexId::new(a), VertexId::new(b)),
            (None, None, true) => BlowUpStep::Point,
            _ => return Err(PyValueError::new_err("give exactly one of vertex, edge, point")),
        };
        self.0.blow_up(&step).map(PyGraph).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.0.exceptional_count()
    }

    fn __repr__(&self) -> String {
        format!("Graph({})", io::graph_to_json(&self.0))
    }
}

/// A classified klt point.
#[pyclass(name = "Basket", frozen, skip_from_py_object)]
struct PyBasket(klt_core::Basket);

#[pymethods]
impl PyBasket {
    #[getter]
    fn key(&self) -> String {
        self.0.key()
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.shape.to_string()
    }

    #[getter]
    fn delta<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.delta)
    }

    #[getter]
    fn r<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.r)
    }

    #[getter]
    fn e_sq(&self) -> i64 {
        self.0.e_sq
    }

    #[getter]
    fn pullback_defect<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.pullback_defect)
    }

    #[getter]
    fn klt_threshold<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.threshold.min_log_discrepancy_excess)
    }

    #[getter]
    fn discrepancies<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (id, a) in &self.0.discrepancies {
            d.set_item(id.as_str(), fraction(py, a)?)?;
        }
        Ok(d)
    }

    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph(self.0.graph.clone())
    }

    fn is_epsilon_klt(&self, epsilon: &Bound<'_, PyAny>) -> PyResult<bool> {
        Ok(self.0.is_epsilon_klt(rational(epsilon)?))
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&io::basket_json(&self.0)).expect("json value")
    }

    fn __repr__(&self) -> String {
        format!("Basket({}, delta={})", self.0.key(), format_rational(&self.0.delta))
    }
}

/// The basket of `graph`, or `None` when the pair is not klt.
#[pyfunction]
fn classify(graph: &PyGraph) -> PyResult<Option<PyBasket>> {
    match discrepancy::classify(&graph.0).map_err(value_err)? {
        Classification::Klt(b) => Ok(Some(PyBasket(*b))),
        Classification::NotKlt => Ok(None),
    }
}

#[pyfunction]
fn hj_expand(n: u64, q: u64) -> PyResult<Vec<u64>> {
    cyclic::hj_expand(n, q).map(|e| e.weights().to_vec()).map_err(value_err)
}

#[pyfunction]
fn hj_evaluate(weights: Vec<u64>) -> PyResult<(u64, u64)> {
    HJExpansion::new(weights).map(|e| cyclic::hj_evaluate(&e)).map_err(value_err)
}

#[pyfunction]
fn dual_q(n: u64, q: u64) -> PyResult<u64> {
    cyclic::dual_q(n, q).map_err(value_err)
}

fn contraction_dict<'py>(py: Python<'py>, d: &ContractionData) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("nu", d.nu)?;
    out.set_item("c", d.c)?;
    out.set_item("k", d.k)?;
    out.set_item("mu", d.mu)?;
    out.set_item("x0", d.x0.key())?;
    out.set_item("points", d.points.iter().map(|p| p.key()).collect::<Vec<_>>())?;
    for (name, v) in [
        ("delta_f", &d.delta_f),
        ("m_term", &d.m_term),
        ("gamma_f", &d.gamma_f),
        ("ch", &d.ch),
        ("c2_change", &d.c2_change),
        ("c1sq_change", &d.c1sq_change),
    ] {
        out.set_item(name, fraction(py, v)?)?;
    }
    Ok(out)
}

/// Ledger of a contraction scenario given as a JSON document. A relative
/// `x0_ref` is resolved against `base_dir`.
#[pyfunction]
#[pyo3(signature = (scenario_json, base_dir=None))]
fn resolve_scenario<'py>(
    py: Python<'py>,
    scenario_json: &str,
    base_dir: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let sc = io::parse_scenario(scenario_json, base_dir.as_deref()).map_err(value_err)?;
    let d = ledger::resolve_scenario(&sc).map_err(value_err)?;
    contraction_dict(py, &d)
}

/// Applies one contraction to a surface state; both are JSON documents.
#[pyfunction]
fn apply_contraction(state_json: &str, scenario_json: &str) -> PyResult<String> {
    let s = io::parse_state(state_json).map_err(value_err)?;
    let sc = io::parse_scenario(scenario_json, None).map_err(value_err)?;
    let next = ledger::apply_contraction(&s, &sc).map_err(value_err)?;
    Ok(serde_json::to_string_pretty(&StateDocument::from_state(&next)).expect("json value"))
}

#[pyfunction]
fn chern_value<'py>(py: Python<'py>, state_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let s = io::parse_state(state_json).map_err(value_err)?;
    fraction(py, &s.chern_value())
}

#[pyfunction]
#[pyo3(signature = (epsilon, r, s, l0=0))]
fn compute_bounds<'py>(
    py: Python<'py>,
    epsilon: &Bound<'py, PyAny>,
    r: &Bound<'py, PyAny>,
    s: &Bound<'py, PyAny>,
    l0: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let b = mmp::compute_bounds(rational(epsilon)?, rational(r)?, l0, rational(s)?)
        .map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("B", fraction(py, &b.b)?)?;
    out.set_item("L", fraction(py, &b.l)?)?;
    out.set_item("max_weight", b.max_weight)?;
    out.set_item("max_boundary_index", b.max_boundary_index)?;
    out.set_item("step_bound", b.step_bound)?;
    Ok(out)
}

/// All ε-klt chains and forks within the budget, sorted by key.
#[pyfunction]
#[pyo3(signature = (epsilon, l, max_vertices, boundary=Vec::new(), max_weight=None))]
fn enumerate_baskets(
    epsilon: &Bound<'_, PyAny>,
    l: u32,
    max_vertices: u32,
    boundary: Vec<u32>,
    max_weight: Option<u32>,
) -> PyResult<Vec<PyBasket>> {
    let mut budget = EnumerationBudget::new(rational(epsilon)?, l, max_vertices);
    budget.max_weight_override = max_weight;
    let ms: BTreeSet<u32> = boundary.into_iter().collect();
    Ok(mmp::enumerate_baskets(&budget, &ms).baskets.into_iter().map(PyBasket).collect())
}

/// Writes a catalog directory and returns the keys it lists.
#[pyfunction]
fn write_catalog(baskets: Vec<PyRef<'_, PyBasket>>, dir: PathBuf) -> PyResult<Vec<String>> {
    let owned: Vec<klt_core::Basket> = baskets.iter().map(|b| b.0.clone()).collect();
    let index = io::write_catalog(&owned, &dir).map_err(value_err)?;
    Ok(index.entries.into_iter().map(|e| e.key).collect())
}

#[pymodule]
pub fn kltsurf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyBasket>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(hj_expand, m)?)?;
    m.add_function(wrap_pyfunction!(hj_evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(dual_q, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(apply_contraction, m)?)?;
    m.add_function(wrap_pyfunction!(chern_value, m)?)?;
    m.add_function(wrap_pyfunction!(compute_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_baskets, m)?)?;
    m.add_function(wrap_pyfunction!(write_catalog, m)?)?;
    Ok(())
}
