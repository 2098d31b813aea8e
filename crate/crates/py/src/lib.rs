//! Python bindings. Configuration objects cross the boundary as plain
//! dicts with the same field names as the JSON configuration files.

use std::path::PathBuf;

use motifhash_core::audit::empirical_sensitivity_audit;
use motifhash_core::data::{self, Item};
use motifhash_core::eval::{map_at_k as core_map_at_k, Direction, RetrievalTask};
use motifhash_core::graph::{build_clipped_graph, triangle_stats, ClippedGraph};
use motifhash_core::hashing::{self, CodeMatrix, HashModelConfig, Modality};
use motifhash_core::pipeline::{self, DataConfig, RunConfig};
use motifhash_core::synthesis::{self, SanitizedGraph, SynthesisConfig};
use motifhash_core::{io, Error};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Invariant(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Deserializes a Python dict (or `None` for the defaults) via JSON.
fn from_py<T: DeserializeOwned + Default>(obj: Option<&Bound<'_, PyAny>>) -> PyResult<T> {
    let Some(obj) = obj else { return Ok(T::default()) };
    if obj.is_none() {
        return Ok(T::default());
    }
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(format!("bad configuration: {e}")))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn modality(name: &str) -> PyResult<Modality> {
    match name {
        "image" => Ok(Modality::Image),
        "text" => Ok(Modality::Text),
        other => Err(PyValueError::new_err(format!("modality must be 'image' or 'text', got {other:?}"))),
    }
}

fn codes_from_rows(rows: &[Vec<i64>]) -> PyResult<CodeMatrix> {
    let k = rows.first().map_or(0, Vec::len);
    let bools: Vec<Vec<bool>> = rows.iter().map(|r| r.iter().map(|&v| v > 0).collect()).collect();
    CodeMatrix::from_bools(k, &bools).map_err(err)
}

fn items_dict<'py>(py: Python<'py>, items: &[Item]) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("ids", items.iter().map(|i| i.id).collect::<Vec<_>>())?;
    d.set_item("images", data::images(items))?;
    d.set_item("texts", data::texts(items))?;
    d.set_item("labels", data::labels(items))?;
    Ok(d)
}

/// Degree-clipped similarity graph over training items.
#[pyclass(name = "ClippedGraph", module = "motifhash", skip_from_py_object)]
#[derive(Clone)]
pub struct PyClippedGraph {
    inner: ClippedGraph,
}

#[pymethods]
impl PyClippedGraph {
    #[staticmethod]
    #[pyo3(signature = (features, d_max, w_floor = 0.0))]
    fn from_features(features: Vec<Vec<f64>>, d_max: usize, w_floor: f64) -> PyResult<Self> {
        Ok(PyClippedGraph { inner: build_clipped_graph(&features, d_max, w_floor).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyClippedGraph { inner: io::load_graph(&path).map_err(err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_graph(&path, &self.inner).map_err(err)
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.graph.n_nodes()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.graph.n_edges()
    }

    #[getter]
    fn d_max(&self) -> usize {
        self.inner.d_max
    }

    fn max_degree(&self) -> usize {
        self.inner.graph.support().max_degree()
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.graph.edges().collect()
    }

    /// Per-edge motif mass, aligned with `edges()`.
    fn triangle_mass(&self) -> Vec<f64> {
        triangle_stats(&self.inner.graph).tau
    }

    fn triangle_count(&self) -> u64 {
        triangle_stats(&self.inner.graph).triangles
    }

    fn __repr__(&self) -> String {
        format!("ClippedGraph(n_nodes={}, n_edges={}, d_max={})", self.n_nodes(), self.n_edges(), self.d_max())
    }
}

/// Released graph plus its privacy receipt.
#[pyclass(name = "SanitizedGraph", module = "motifhash", skip_from_py_object)]
#[derive(Clone)]
pub struct PySanitizedGraph {
    inner: SanitizedGraph,
}

#[pymethods]
impl PySanitizedGraph {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PySanitizedGraph { inner: io::load_sanitized(&path).map_err(err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_sanitized(&path, &self.inner).map_err(err)
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn receipt<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.receipt)
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.graph.edges().collect()
    }

    fn entry(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.n_nodes();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!("node out of range for {n} nodes")));
        }
        Ok(self.inner.entry(i, j))
    }

    fn __repr__(&self) -> String {
        let r = &self.inner.receipt;
        format!(
            "SanitizedGraph(n_nodes={}, entries={}, epsilon={}, delta={}, sigma={})",
            self.inner.n_nodes(),
            self.inner.graph.n_edges(),
            r.epsilon,
            r.delta,
            r.sigma
        )
    }
}

/// Pair of hash encoders trained from features and a sanitized graph.
#[pyclass(name = "HashModel", module = "motifhash", skip_from_py_object)]
#[derive(Clone)]
pub struct PyHashModel {
    inner: hashing::HashModel,
    #[pyo3(get)]
    loss_trace: Vec<f64>,
}

#[pymethods]
impl PyHashModel {
    /// Trains on `images[i]`, `texts[i]` as node `i` of `sanitized`.
    #[staticmethod]
    #[pyo3(signature = (images, texts, sanitized, config = None))]
    fn train(
        images: Vec<Vec<f64>>,
        texts: Vec<Vec<f64>>,
        sanitized: &PySanitizedGraph,
        config: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Self> {
        let mut cfg: HashModelConfig = from_py(config)?;
        if cfg.image_dim == 0 {
            cfg.image_dim = images.first().map_or(0, Vec::len);
        }
        if cfg.text_dim == 0 {
            cfg.text_dim = texts.first().map_or(0, Vec::len);
        }
        let trained = hashing::train(&images, &texts, &sanitized.inner, &cfg).map_err(err)?;
        Ok(PyHashModel { inner: trained.model, loss_trace: trained.loss_trace })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyHashModel { inner: io::load_model(&path).map_err(err)?, loss_trace: Vec::new() })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_model(&path, &self.inner).map_err(err)
    }

    #[getter]
    fn k_bits(&self) -> usize {
        self.inner.config.k_bits
    }

    #[getter]
    fn config<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.config)
    }

    /// `±1` codes of `features` for `modality` ("image" or "text").
    fn encode(&self, features: Vec<Vec<f64>>, modality: &str) -> PyResult<Vec<Vec<i8>>> {
        let codes = hashing::binarize(&self.inner, &features, self::modality(modality)?).map_err(err)?;
        Ok((0..codes.len()).map(|r| codes.row_signs(r)).collect())
    }

    fn __repr__(&self) -> String {
        let c = &self.inner.config;
        format!("HashModel(k_bits={}, image_dim={}, text_dim={}, hidden_dim={})", c.k_bits, c.image_dim, c.text_dim, c.hidden_dim)
    }
}

/// Synthetic dataset split into `{"train": ..., "query": ...}` item dicts.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn generate_dataset<'py>(py: Python<'py>, config: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyDict>> {
    let cfg: DataConfig = from_py(config)?;
    let dataset = pipeline::generate_data(&cfg).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("train", items_dict(py, &dataset.train_items().map_err(err)?)?)?;
    out.set_item("query", items_dict(py, &dataset.query_items().map_err(err)?)?)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (graph, config = None))]
fn synthesize(graph: &PyClippedGraph, config: Option<&Bound<'_, PyAny>>) -> PyResult<PySanitizedGraph> {
    let cfg: SynthesisConfig = from_py(config)?;
    Ok(PySanitizedGraph { inner: synthesis::synthesize(&graph.inner, &cfg).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (delta2, epsilon, delta, t_steps, c = 2.0))]
fn calibrate_noise(delta2: f64, epsilon: f64, delta: f64, t_steps: usize, c: f64) -> PyResult<f64> {
    synthesis::calibrate_noise(delta2, epsilon, delta, t_steps, c).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d_max, w_max = 1.0, lambda_reg = 0.1))]
fn sensitivity_bound(d_max: usize, w_max: f64, lambda_reg: f64) -> PyResult<f64> {
    synthesis::sensitivity_bound(d_max, w_max, lambda_reg).map_err(err)
}

/// Returns `(values, signal_lost)`.
#[pyfunction]
fn rectified_log_normalize(raw: Vec<f64>) -> (Vec<f64>, bool) {
    let r = synthesis::rectified_log_normalize(&raw);
    (r.values, r.signal_lost)
}

#[pyfunction]
#[pyo3(signature = (graph, config = None))]
fn audit_sensitivity<'py>(
    py: Python<'py>,
    graph: &PyClippedGraph,
    config: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg: SynthesisConfig = from_py(config)?;
    to_py(py, &empirical_sensitivity_audit(&graph.inner, &cfg).map_err(err)?)
}

/// mAP@k of `±1` query codes searched against `±1` database codes.
#[pyfunction]
#[pyo3(signature = (query_codes, database_codes, query_labels, database_labels, k = 50))]
fn map_at_k(
    query_codes: Vec<Vec<i64>>,
    database_codes: Vec<Vec<i64>>,
    query_labels: Vec<Vec<u32>>,
    database_labels: Vec<Vec<u32>>,
    k: usize,
) -> PyResult<f64> {
    let (queries, database) = (codes_from_rows(&query_codes)?, codes_from_rows(&database_codes)?);
    core_map_at_k(&RetrievalTask {
        direction: Direction::ImageToText,
        queries: &queries,
        database: &database,
        query_labels: &query_labels,
        database_labels: &database_labels,
        k,
    })
    .map_err(err)
}

/// Runs every phase in memory and returns the metrics report.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn run_pipeline<'py>(py: Python<'py>, config: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    let cfg: RunConfig = from_py(config)?;
    let run = py.detach(|| pipeline::run_pipeline(&cfg)).map_err(err)?;
    to_py(py, &run.report)
}

#[pymodule]
fn motifhash(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyClippedGraph>()?;
    m.add_class::<PySanitizedGraph>()?;
    m.add_class::<PyHashModel>()?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_noise, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_bound, m)?)?;
    m.add_function(wrap_pyfunction!(rectified_log_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(audit_sensitivity, m)?)?;
    m.add_function(wrap_pyfunction!(map_at_k, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_rows_map_signs_to_bits() {
        let codes = codes_from_rows(&[vec![1, -1, 1], vec![-1, -1, 1]]).unwrap();
        assert_eq!(codes.k_bits(), 3);
        assert_eq!(codes.row_bools(0), vec![true, false, true]);
        assert_eq!(codes.row_signs(1), vec![-1, -1, 1]);
    }

    #[test]
    fn modality_names_parse() {
        assert_eq!(modality("image").unwrap(), Modality::Image);
        assert_eq!(modality("text").unwrap(), Modality::Text);
    }
}
