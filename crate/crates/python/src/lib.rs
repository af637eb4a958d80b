//! Python bindings. Trees and exact quantities map onto native Python
//! values; experiments take and return the same JSON documents as the CLI.

use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::exceptions::{PyIndexError, PyNotImplementedError, PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use treepersist::experiments::{self, ExperimentConfig, HubConfig};
use treepersist::growth::{self, GrowthEvent};
use treepersist::urn::{self, UrnSpec};
use treepersist::walk::{self, WalkParams};
use treepersist::{Error, ModelKind, ModelSpec, RngStream, SeedGraph};

fn to_py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::UnknownVertex { .. } => PyIndexError::new_err(msg),
        Error::Overflow(_) | Error::DegreeOverflow { .. } => PyOverflowError::new_err(msg),
        Error::UnsupportedModel(_) => PyNotImplementedError::new_err(msg),
        Error::NonTreeInput(_) | Error::Domain(_) | Error::Config(_) | Error::TooFewSamples { .. } | Error::Undefined => {
            PyValueError::new_err(msg)
        }
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for treepersist::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

fn parse_model(model: &str) -> PyResult<ModelKind> {
    model.parse::<ModelKind>().map_err(|e| PyValueError::new_err(e.to_string()))
}

fn walk_params(model: &str) -> PyResult<WalkParams> {
    walk::params_for_model(parse_model(model)?).py_err()
}

fn fraction<'py>(py: Python<'py>, p: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    let (num, den): (BigInt, BigInt) = (p.numer().clone(), p.denom().clone());
    py.import("fractions")?.getattr("Fraction")?.call1((num, den))
}

fn json_value<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A birth-ordered tree that keeps its centroids current under leaf insertion.
#[pyclass(name = "GrowingTree", module = "treepersist")]
struct PyGrowingTree {
    inner: treepersist::GrowingTree,
}

#[pymethods]
impl PyGrowingTree {
    #[new]
    #[pyo3(signature = (edges = None))]
    fn new(edges: Option<Vec<(usize, usize)>>) -> PyResult<Self> {
        let inner = treepersist::GrowingTree::new_tree(&edges.unwrap_or_default()).py_err()?;
        Ok(PyGrowingTree { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        let c = self.inner.cached_centroids();
        format!("GrowingTree(n={}, centroids={:?})", self.inner.n(), c.members)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn add_leaf(&mut self, parent: usize) -> PyResult<usize> {
        self.inner.add_leaf(parent).py_err()
    }

    /// `(child, parent)` pairs in birth order.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        if v >= self.inner.n() {
            return Err(to_py_err(Error::UnknownVertex { vertex: v, n: self.inner.n() }));
        }
        Ok(self.inner.degree(v))
    }

    fn parent(&self, v: usize) -> Option<usize> {
        self.inner.parent(v)
    }

    fn psi(&self, u: usize) -> PyResult<usize> {
        self.inner.psi(u).py_err()
    }

    fn psi_all(&self) -> PyResult<Vec<usize>> {
        self.inner.psi_all().py_err()
    }

    /// `(members, psi)`.
    fn centroids(&self) -> (Vec<usize>, usize) {
        let c = self.inner.centroids();
        (c.members, c.psi_value)
    }

    fn is_centroid(&self, u: usize) -> bool {
        self.inner.is_centroid(u)
    }

    /// `(ordered [(vertex, psi)], boundary_tied)`.
    fn top_k(&self, k: usize) -> (Vec<(usize, usize)>, bool) {
        let t = self.inner.top_k(k);
        (t.ordered, t.boundary_tied)
    }

    fn to_edge_list(&self) -> String {
        treepersist::tree::format_edge_list(&self.inner.edges())
    }

    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        let edges = treepersist::tree::parse_edge_list(text).py_err()?;
        Self::new(Some(edges))
    }
}

fn model_spec(model: &str, hub: Option<usize>, ball: Option<usize>) -> PyResult<ModelSpec> {
    let seed_graph = match (hub, ball) {
        (None, None) => SeedGraph::Single,
        (Some(k), None) => SeedGraph::StarHub { k },
        (None, Some(r)) => SeedGraph::RBall { r },
        (Some(_), Some(_)) => return Err(PyValueError::new_err("pass at most one of hub and ball")),
    };
    let spec = ModelSpec::with_seed(parse_model(model)?, seed_graph);
    spec.validate().py_err()?;
    Ok(spec)
}

/// Grows a tree to `n` vertices. `model` is "ua", "pa" or "diff:<d>".
#[pyfunction]
#[pyo3(signature = (model, n, seed, hub = None, ball = None, stream = 0))]
fn grow(py: Python<'_>, model: &str, n: usize, seed: u64, hub: Option<usize>, ball: Option<usize>, stream: u64) -> PyResult<PyGrowingTree> {
    let spec = model_spec(model, hub, ball)?;
    let inner = py
        .detach(|| growth::grow(&spec, n, &mut RngStream::new(seed, stream).rng(), |_: &GrowthEvent, _| {}))
        .py_err()?;
    Ok(PyGrowingTree { inner })
}

#[pyfunction]
fn theta_paths(a: usize, b: usize, m: usize) -> PyResult<num_bigint::BigUint> {
    walk::theta_paths(a, b, m).py_err()
}

#[pyfunction]
fn path_prob<'py>(py: Python<'py>, model: &str, a: usize, b: usize, m: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &walk::path_prob(&walk_params(model)?, a, b, m).py_err()?)
}

#[pyfunction]
fn first_hit_exact<'py>(py: Python<'py>, model: &str, a: usize, m: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &walk::first_hit_exact(&walk_params(model)?, a, m).py_err()?)
}

/// Probability that the walk from `(a, 1)` ever meets the diagonal, as a
/// dict with `value`, `truncation_m` and `tail_bound`.
#[pyfunction]
#[pyo3(signature = (model, a, m_max = None, method = "series"))]
fn hit_prob<'py>(py: Python<'py>, model: &str, a: usize, m_max: Option<usize>, method: &str) -> PyResult<Bound<'py, PyAny>> {
    let params = walk_params(model)?;
    let m = m_max.unwrap_or_else(|| walk::default_truncation(a));
    let result = match method {
        "series" => py.detach(|| walk::hit_prob_series(&params, a, m)),
        "dp" => py.detach(|| walk::hit_prob_dp(&params, a, m)),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}, expected series or dp"))),
    }
    .py_err()?;
    json_value(py, &result)
}

#[pyfunction]
#[pyo3(signature = (model, a_lo, a_hi, m_max = None))]
fn envelope_check<'py>(py: Python<'py>, model: &str, a_lo: usize, a_hi: usize, m_max: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let params = walk_params(model)?;
    let m = m_max.unwrap_or_else(|| walk::default_truncation(a_hi));
    let report = py.detach(|| walk::envelope_check(&params, a_lo..=a_hi, m)).py_err()?;
    json_value(py, &report)
}

#[pyfunction]
fn symmetry_prob_pa<'py>(py: Python<'py>, k: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &experiments::symmetry_prob_pa(k).py_err()?)
}

#[pyfunction]
fn symmetry_prob_ua<'py>(py: Python<'py>, k: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &experiments::symmetry_prob_ua(k).py_err()?)
}

#[pyfunction]
fn symmetry_prob_diffusion<'py>(py: Python<'py>, d: usize, r: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &experiments::symmetry_prob_diffusion(d, r).py_err()?)
}

#[pyfunction]
fn sufficient_hub_size(epsilon: f64) -> PyResult<usize> {
    experiments::sufficient_hub_size(epsilon).py_err()
}

#[pyfunction]
fn necessary_bound_report<'py>(py: Python<'py>, model: &str, epsilon: f64) -> PyResult<Bound<'py, PyAny>> {
    json_value(py, &experiments::necessary_bound_report(parse_model(model)?, epsilon).py_err()?)
}

/// Colour fractions of one urn run.
#[pyfunction]
#[pyo3(signature = (start, reinforcement, offset, steps, seed, stream = 0))]
fn simulate_urn(py: Python<'_>, start: Vec<u64>, reinforcement: u64, offset: Vec<f64>, steps: u64, seed: u64, stream: u64) -> PyResult<Vec<f64>> {
    let spec = UrnSpec::new(start, reinforcement, offset).py_err()?;
    Ok(py.detach(|| urn::simulate_urn(&spec, steps, &mut RngStream::new(seed, stream).rng())))
}

/// Parameters of the limiting law of the competing-subtree urn started at `(a, 1)`.
#[pyfunction]
fn limit_law_two<'py>(py: Python<'py>, model: &str, a: usize) -> PyResult<Bound<'py, PyAny>> {
    json_value(py, &urn::limit_law_two(&walk_params(model)?, a).py_err()?)
}

#[pyfunction]
fn limit_law_k<'py>(py: Python<'py>, model: &str, degrees: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
    json_value(py, &urn::limit_law_k(parse_model(model)?, degrees.len(), &degrees).py_err()?)
}

#[pyfunction]
fn reg_inc_beta(a: f64, b: f64, x: f64) -> PyResult<f64> {
    urn::reg_inc_beta(a, b, x).py_err()
}

/// One-sample KS test against Beta(a, b); returns `(D, p)`.
#[pyfunction]
fn ks_beta(samples: Vec<f64>, a: f64, b: f64) -> PyResult<(f64, f64)> {
    let ks = urn::ks_statistic(&samples, |x| urn::beta_cdf(a, b, x)).py_err()?;
    Ok((ks.d, ks.p_value))
}

#[pyfunction]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64)> {
    let ks = urn::ks_two_sample(&a, &b).py_err()?;
    Ok((ks.d, ks.p_value))
}

/// Runs a persistence experiment from a JSON config and returns its summary.
#[pyfunction]
#[pyo3(signature = (config_json, with_traces = false))]
fn run_persistence<'py>(py: Python<'py>, config_json: &str, with_traces: bool) -> PyResult<Bound<'py, PyAny>> {
    let config = ExperimentConfig::from_json(config_json).py_err()?;
    let run = py.detach(|| experiments::run_persistence(&config)).py_err()?;
    if with_traces {
        json_value(py, &run)
    } else {
        json_value(py, &run.summary)
    }
}

#[pyfunction]
#[pyo3(signature = (config_json, with_traces = false))]
fn run_hub<'py>(py: Python<'py>, config_json: &str, with_traces: bool) -> PyResult<Bound<'py, PyAny>> {
    let config = HubConfig::from_json(config_json).py_err()?;
    let run = py.detach(|| experiments::run_hub(&config)).py_err()?;
    if with_traces {
        json_value(py, &run)
    } else {
        json_value(py, &run.summary)
    }
}

#[pymodule]
#[pyo3(name = "treepersist")]
fn treepersist_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrowingTree>()?;
    m.add_function(wrap_pyfunction!(grow, m)?)?;
    m.add_function(wrap_pyfunction!(theta_paths, m)?)?;
    m.add_function(wrap_pyfunction!(path_prob, m)?)?;
    m.add_function(wrap_pyfunction!(first_hit_exact, m)?)?;
    m.add_function(wrap_pyfunction!(hit_prob, m)?)?;
    m.add_function(wrap_pyfunction!(envelope_check, m)?)?;
    m.add_function(wrap_pyfunction!(symmetry_prob_pa, m)?)?;
    m.add_function(wrap_pyfunction!(symmetry_prob_ua, m)?)?;
    m.add_function(wrap_pyfunction!(symmetry_prob_diffusion, m)?)?;
    m.add_function(wrap_pyfunction!(sufficient_hub_size, m)?)?;
    m.add_function(wrap_pyfunction!(necessary_bound_report, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_urn, m)?)?;
    m.add_function(wrap_pyfunction!(limit_law_two, m)?)?;
    m.add_function(wrap_pyfunction!(limit_law_k, m)?)?;
    m.add_function(wrap_pyfunction!(reg_inc_beta, m)?)?;
    m.add_function(wrap_pyfunction!(ks_beta, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(run_persistence, m)?)?;
    m.add_function(wrap_pyfunction!(run_hub, m)?)?;
    Ok(())
}
