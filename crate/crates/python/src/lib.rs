//! Python bindings. Structured results cross the boundary as plain dicts and lists.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use multirc::analysis::{classify_outcome, multifunctionality_success, roundness as roundness_of, stm as stm_of, StmConfig};
use multirc::config::{parse_override, ConfigError, RunConfig};
use multirc::experiments::ngrc_sweep::NgrcTask;
use multirc::experiments::{
    ngrc_beta_sweep as beta_sweep, ngrc_preset as ngrc_row, reservoir_preset as reservoir_row, run_seeing_double_trial_with,
    Preset, TrialOptions,
};
use multirc::ngrc::NgrcSpec;
use multirc::reservoir::{generate_network, ReservoirKind, ReservoirSpec};
use multirc::TimeSeries;

fn core_err(e: multirc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config_err(e: ConfigError) -> PyErr {
    match e {
        ConfigError::UnknownKey(_) => PyKeyError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned>(value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = value.py().import("json")?.call_method1("dumps", (value,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn series(points: Vec<Vec<f64>>, step: f64) -> PyResult<TimeSeries> {
    TimeSeries::from_points(step, &points).map_err(core_err)
}

fn preset(name: &str) -> PyResult<Preset> {
    Preset::parse(name).ok_or_else(|| PyKeyError::new_err(format!("unknown preset `{name}`")))
}

fn kind(name: &str) -> PyResult<ReservoirKind> {
    match name {
        "ct" => Ok(ReservoirKind::Ct),
        "li" => Ok(ReservoirKind::Li),
        _ => Err(PyValueError::new_err(format!("expected ct or li, got `{name}`"))),
    }
}

/// Layered run configuration, as read by the command-line runner.
#[pyclass(name = "Config")]
struct PyConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyConfig {
    /// `Config(command, preset=None, toml=None, overrides=[])` with overrides as `"key=value"`.
    #[new]
    #[pyo3(signature = (command, preset=None, toml=None, overrides=Vec::new()))]
    fn new(command: &str, preset: Option<&str>, toml: Option<&str>, overrides: Vec<String>) -> PyResult<Self> {
        let mut layered = vec![("command".to_string(), toml::Value::String(command.into()))];
        for o in &overrides {
            layered.push(parse_override(o).map_err(config_err)?);
        }
        let inner = RunConfig::parse(toml, preset, &layered).map_err(config_err)?;
        Ok(Self { inner })
    }

    fn set(&mut self, assignment: &str) -> PyResult<()> {
        let (k, v) = parse_override(assignment).map_err(config_err)?;
        self.inner.set(&k, v).map_err(config_err)?;
        self.inner.validate().map_err(config_err)
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    /// Runs the command and returns `{file name: contents}` without writing anything.
    fn run(&self, py: Python<'_>) -> PyResult<Vec<(String, String)>> {
        let cfg = self.inner.clone();
        let out = py.detach(move || multirc_cli::execute(&cfg)).map_err(core_err)?;
        Ok(out.files)
    }

    /// Runs the command and writes a fresh run directory under `directory`.
    fn run_to(&self, py: Python<'_>, directory: &str) -> PyResult<String> {
        let cfg = self.inner.clone();
        let dir = directory.to_string();
        py.detach(move || {
            let out = multirc_cli::execute(&cfg)?;
            multirc_cli::persist(&cfg, dir.as_ref(), &out)
        })
        .map(|p| p.display().to_string())
        .map_err(core_err)
    }

    fn __repr__(&self) -> String {
        format!("Config(command={:?}, kind={:?})", self.inner.command, self.inner.kind)
    }
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    Preset::ALL.iter().map(|p| p.name()).collect()
}

/// CT/LI parameters of a preset as a dict.
#[pyfunction]
fn reservoir_preset<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    let spec = reservoir_row(preset(name)?).ok_or_else(|| PyValueError::new_err(format!("{name} is an NG-RC preset")))?;
    to_py(py, &spec)
}

/// `(spec, train_horizon)` of an NG-RC preset.
#[pyfunction]
fn ngrc_preset<'py>(py: Python<'py>, name: &str) -> PyResult<(Bound<'py, PyAny>, f64)> {
    let (spec, horizon) = ngrc_row(preset(name)?).ok_or_else(|| PyValueError::new_err(format!("{name} is not NG-RC")))?;
    Ok((to_py(py, &spec)?, horizon))
}

/// One seeing-double trial; `spec` is a dict as returned by `reservoir_preset`.
#[pyfunction]
#[pyo3(signature = (kind_name, spec, seed, floquet=false, with_stm=false))]
fn seeing_double_trial<'py>(
    py: Python<'py>,
    kind_name: &str,
    spec: &Bound<'py, PyAny>,
    seed: u64,
    floquet: bool,
    with_stm: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let k = kind(kind_name)?;
    let spec: ReservoirSpec = from_py(spec)?;
    spec.validate().map_err(core_err)?;
    let options = TrialOptions { floquet, stm: with_stm.then(StmConfig::default), ..TrialOptions::default() };
    let report = py.detach(move || run_seeing_double_trial_with(k, &spec, seed, &options));
    to_py(py, &report)
}

/// Short-term memory of the network drawn from `spec` at `seed`.
#[pyfunction]
#[pyo3(signature = (spec, seed, max_shift=100, signal_length=5000, washout=500))]
fn stm(spec: &Bound<'_, PyAny>, seed: u64, max_shift: usize, signal_length: usize, washout: usize) -> PyResult<f64> {
    let spec: ReservoirSpec = from_py(spec)?;
    let spec = ReservoirSpec { seed, ..spec };
    let cfg = StmConfig { max_shift, signal_length, washout, seed, ..StmConfig::default() };
    let (m, _, _) = generate_network(&spec, 2).map_err(core_err)?;
    stm_of(&m, &spec, &cfg).map_err(core_err)
}

/// NG-RC β sweep on the circle pair; returns one dict per β.
#[pyfunction]
fn ngrc_beta_sweep<'py>(py: Python<'py>, spec: &Bound<'py, PyAny>, betas: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let spec: NgrcSpec = from_py(spec)?;
    let records = py.detach(move || beta_sweep(&spec, &betas, &NgrcTask::default())).map_err(core_err)?;
    to_py(py, &records)
}

/// Outcome class, period, rotation and roundness of a closed-loop prediction.
#[pyfunction]
#[pyo3(signature = (points, step=0.01))]
fn classify<'py>(py: Python<'py>, points: Vec<Vec<f64>>, step: f64) -> PyResult<Bound<'py, PyAny>> {
    let o = classify_outcome(&series(points, step)?).map_err(core_err)?;
    to_py(py, &o)
}

/// Multifunctionality verdict for predictions of the two circles.
#[pyfunction]
#[pyo3(signature = (a, b, step=0.01))]
fn judge<'py>(py: Python<'py>, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, step: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = multifunctionality_success(&series(a, step)?, &series(b, step)?);
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (points, center=[0.0, 0.0]))]
fn roundness(points: Vec<Vec<f64>>, center: [f64; 2]) -> PyResult<f64> {
    roundness_of(&series(points, 1.0)?, &center).map_err(core_err)
}

#[pymodule]
fn pymultirc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(reservoir_preset, m)?)?;
    m.add_function(wrap_pyfunction!(ngrc_preset, m)?)?;
    m.add_function(wrap_pyfunction!(seeing_double_trial, m)?)?;
    m.add_function(wrap_pyfunction!(stm, m)?)?;
    m.add_function(wrap_pyfunction!(ngrc_beta_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(judge, m)?)?;
    m.add_function(wrap_pyfunction!(roundness, m)?)?;
    Ok(())
}
