//! Python bindings: point families, subset-sum lattices, incidence and energy
//! checks, the X-ray inequality suite and the ratio sweep.

use std::path::PathBuf;

use mtc_core::construction::{build_caps, build_lattice, Mollifier, SubsetSumLattice};
use mtc_core::estimates::{hy_suite as core_hy_suite, DrawKind};
use mtc_core::experiment::{self, verify, ExperimentConfig};
use mtc_core::geometry::PointFamily;
use mtc_core::incidence::{run_suite, SuiteConfig};
use mtc_core::numeric;
use mtc_core::transforms::{energy_delta, energy_quadrature};
use mtc_core::Error;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(mtc, GateFailed, PyException, "The incidence gate rejected a family.");

fn py_err(e: Error) -> PyErr {
    match e {
        Error::GateFailed(msg) => GateFailed::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Serializes through JSON into plain Python dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_kind(kind: &str) -> PyResult<DrawKind> {
    match kind {
        "complex" => Ok(DrawKind::Complex),
        "nonnegative" => Ok(DrawKind::Nonnegative),
        "fourier_nonnegative" => Ok(DrawKind::FourierNonnegative),
        other => Err(PyValueError::new_err(format!("unknown draw kind {other:?}"))),
    }
}

/// Experiment configuration; keyword arguments override the defaults.
#[pyclass(name = "Config", module = "mtc", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(overrides: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let mut value = serde_json::to_value(ExperimentConfig::default())
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        if let Some(kw) = overrides {
            let json = kw.py().import("json")?;
            let text: String = json.call_method1("dumps", (kw,))?.extract()?;
            let extra: serde_json::Map<String, serde_json::Value> =
                serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
            let obj = value.as_object_mut().expect("config serializes to an object");
            obj.extend(extra);
        }
        let inner: ExperimentConfig =
            serde_json::from_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Loads a TOML or JSON file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: ExperimentConfig::load(&path).map_err(py_err)? })
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml().map_err(py_err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Config(d={}, c={:?}, schedule={:?})", self.inner.d, self.inner.c, self.inner.schedule)
    }
}

/// Lifted lacunary points xi_0, xi_1..xi_N at the matched scale R.
#[pyclass(name = "Family", module = "mtc", frozen)]
struct PyFamily {
    inner: PointFamily,
}

#[pymethods]
impl PyFamily {
    #[new]
    #[pyo3(signature = (n, c, d = 2, b = 2.0, n0 = 2, surface = "paraboloid"))]
    fn new(n: usize, c: f64, d: usize, b: f64, n0: usize, surface: &str) -> PyResult<Self> {
        let cfg = ExperimentConfig { d, b, n0, surface: surface.into(), ..Default::default() };
        Ok(Self { inner: experiment::family_for(&cfg, c, n).map_err(py_err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }

    #[getter]
    fn xi0(&self) -> Vec<f64> {
        self.inner.xi0.clone()
    }

    #[getter]
    fn xis(&self) -> Vec<Vec<f64>> {
        self.inner.xis.clone()
    }

    fn is_separated(&self) -> bool {
        self.inner.is_separated()
    }

    /// Subset sums of weight k of the generators xi_j - xi_0.
    #[pyo3(signature = (k = None))]
    fn lattice(&self, k: Option<usize>) -> PyResult<PyLattice> {
        let k = k.unwrap_or(self.inner.n() / 2);
        Ok(PyLattice { inner: build_lattice(&self.inner, k).map_err(py_err)? })
    }

    /// Bad-set, separation and plane-incidence suite.
    #[pyo3(signature = (dirs = 10_000, seed = 7))]
    fn incidence_check<'py>(&self, py: Python<'py>, dirs: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let suite = SuiteConfig { dirs, seed, ..Default::default() };
        let rep = py.detach(|| run_suite(&self.inner, &suite)).map_err(py_err)?;
        to_py(py, &rep)
    }

    /// Sum of squared multiplicities of {xi_i + q}.
    #[pyo3(signature = (k = None))]
    fn energy_delta(&self, k: Option<usize>) -> PyResult<f64> {
        let lat = build_lattice(&self.inner, k.unwrap_or(self.inner.n() / 2)).map_err(py_err)?;
        Ok(energy_delta(&self.inner, &lat).map_err(py_err)?.value)
    }

    /// Cap-quadrature energy divided by R^d, with its error bound.
    #[pyo3(signature = (quad_order = 8, near_radius = 10.0))]
    fn energy_quadrature(&self, py: Python<'_>, quad_order: usize, near_radius: f64) -> PyResult<(f64, f64)> {
        let fam = &self.inner;
        let res = py
            .detach(|| {
                let lat = build_lattice(fam, fam.n() / 2)?;
                let caps = build_caps(fam, quad_order)?;
                energy_quadrature(&caps, &lat, &Mollifier::default(), near_radius)
            })
            .map_err(py_err)?;
        Ok((res.normalized, res.error_bound / fam.r.powi(fam.d() as i32)))
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_json())
    }

    fn __repr__(&self) -> String {
        format!(
            "Family(d={}, N={}, c={}, R={:e})",
            self.inner.d(),
            self.inner.n(),
            self.inner.params.c,
            self.inner.r
        )
    }
}

/// Subset-sum lattice Q.
#[pyclass(name = "Lattice", module = "mtc", frozen)]
struct PyLattice {
    inner: SubsetSumLattice,
}

#[pymethods]
impl PyLattice {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    /// Coefficient bit-vectors, increasing.
    #[getter]
    fn bits(&self) -> Vec<u64> {
        self.inner.bits.clone()
    }

    /// Element positions rounded to f64.
    fn positions(&self) -> Vec<Vec<f64>> {
        self.inner.positions().map(numeric::hi).collect()
    }

    /// Fraction of elements with coefficient 0 at index i.
    fn shifted_membership(&self, i: usize) -> PyResult<f64> {
        Ok(mtc_core::construction::shifted_membership(&self.inner, i).map_err(py_err)?.1)
    }
}

/// Random-draw check of the discrete X-ray inequality.
#[pyfunction]
#[pyo3(signature = (d = 2, m = 32, ps = vec![1.0, 2.0, f64::INFINITY], draws = 100, seed = 11, kind = "complex"))]
fn hy_suite<'py>(
    py: Python<'py>,
    d: usize,
    m: usize,
    ps: Vec<f64>,
    draws: usize,
    seed: u64,
    kind: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = parse_kind(kind)?;
    let s = py.detach(|| core_hy_suite(d, m, &ps, draws, seed, kind)).map_err(py_err)?;
    to_py(py, &s)
}

/// First candidate c passing the incidence suite at N = n; returns (c, trials).
#[pyfunction]
#[pyo3(signature = (config, n = 12))]
fn search_c<'py>(py: Python<'py>, config: &PyConfig, n: usize) -> PyResult<(f64, Bound<'py, PyAny>)> {
    let cfg = &config.inner;
    let (c, trials) = py.detach(|| experiment::search_c(cfg, n, &cfg.suite())).map_err(py_err)?;
    Ok((c, to_py(py, &trials)?))
}

/// Full ratio sweep; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (config = None, out_dir = None))]
fn ratio_sweep<'py>(
    py: Python<'py>,
    config: Option<PyConfig>,
    out_dir: Option<PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config.map(|c| c.inner).unwrap_or_default();
    let rep = py.detach(|| experiment::ratio_sweep(&cfg)).map_err(py_err)?;
    if let Some(dir) = out_dir {
        experiment::write_report(&rep, &dir).map_err(py_err)?;
    }
    to_py(py, &rep)
}

/// Every acceptance check as a list of dicts.
#[pyfunction]
#[pyo3(signature = (quick = true))]
fn verify_all<'py>(py: Python<'py>, quick: bool) -> PyResult<Bound<'py, PyAny>> {
    let res = py.detach(|| verify::verify_all(quick));
    to_py(py, &res)
}

#[pymodule]
fn mtc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyFamily>()?;
    m.add_class::<PyLattice>()?;
    m.add_function(wrap_pyfunction!(hy_suite, m)?)?;
    m.add_function(wrap_pyfunction!(search_c, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    m.add("GateFailed", m.py().get_type::<GateFailed>())?;
    Ok(())
}
