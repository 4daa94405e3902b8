//! Python bindings: expose the rate table, the density ODE solver, the
//! kinetic Monte Carlo simulator, and the exact small-ring oracle.
//!
//! Build with `cargo build --release -p parking-py`; the resulting cdylib
//! imports as the `parking_py` module (see python/smoke_test.py).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use parking_core::model::{self, ModelVariant, NeighborhoodTriple, SiteState, TransitionKind};
use parking_core::ode;
use parking_core::oracle;
use parking_core::simulator::{self, Pattern, SimConfig};

fn value_err(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn parse_model(model: &str) -> PyResult<ModelVariant> {
    model.parse().map_err(value_err)
}

fn parse_state(code: u8) -> PyResult<SiteState> {
    SiteState::from_code(code).map_err(value_err)
}

fn parse_pattern(codes: &[u8]) -> PyResult<Pattern> {
    codes.iter().map(|&c| parse_state(c)).collect()
}

/// Rate of the transition moving the center of (left, center, right) to
/// `target`; 0 or 1.
#[pyfunction]
fn transition_rate(model: &str, target: u8, left: u8, center: u8, right: u8) -> PyResult<u8> {
    let triple = NeighborhoodTriple::new(parse_state(left)?, parse_state(center)?, parse_state(right)?);
    Ok(model::transition_rate(parse_model(model)?, parse_state(target)?, triple))
}

/// What an arrival attempt does at the center of (left, center, right):
/// "first_line", "second_line_from_empty", "second_line_on_top", or
/// "discard".
#[pyfunction]
fn attempt_outcome(model: &str, left: u8, center: u8, right: u8) -> PyResult<&'static str> {
    let triple = NeighborhoodTriple::new(parse_state(left)?, parse_state(center)?, parse_state(right)?);
    Ok(match model::attempt_outcome(parse_model(model)?, triple) {
        TransitionKind::FirstLine => "first_line",
        TransitionKind::SecondLineFromEmpty => "second_line_from_empty",
        TransitionKind::SecondLineOnTop => "second_line_on_top",
        TransitionKind::Discard => "discard",
    })
}

/// `exp(e^{-t} - 1)`, the closed form for f(0) + f(2) without screening.
#[pyfunction]
fn closed_form_fsum(t: f64) -> f64 {
    ode::closed_form_fsum(t)
}

/// SplitMix64-derived stream seed for one replica.
#[pyfunction]
fn derive_replica_seed(master_seed: u64, replica_index: u64) -> u64 {
    simulator::derive_replica_seed(master_seed, replica_index)
}

/// Endpoint line densities of an integrated trajectory.
#[pyclass(name = "LimitSummary", get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyLimitSummary {
    line1: f64,
    line2: f64,
    increase_factor: f64,
    residual_drift: f64,
}

#[pymethods]
impl PyLimitSummary {
    fn __repr__(&self) -> String {
        format!(
            "LimitSummary(line1={}, line2={}, increase_factor={}, residual_drift={:e})",
            self.line1, self.line2, self.increase_factor, self.residual_drift
        )
    }
}

/// Recorded solution of the 9-dimensional density system.
#[pyclass(name = "Trajectory")]
struct PyTrajectory {
    inner: ode::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    /// Recorded times.
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    /// One component as a list aligned with `times()`. Names: D0..D3,
    /// f0..f2, R, D010, line1, line2, f3.
    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        let pick: fn(&ode::OdeState) -> f64 = match name {
            "D0" => |y| y.d0,
            "D1" => |y| y.d1,
            "D2" => |y| y.d2,
            "D3" => |y| y.d3,
            "f0" => |y| y.f0,
            "f1" => |y| y.f1,
            "f2" => |y| y.f2,
            "R" => |y| y.r,
            "D010" => |y| y.d010,
            "line1" => |y| y.line1(),
            "line2" => |y| y.line2(),
            "f3" => |y| y.f3(),
            _ => return Err(value_err(format!("unknown column '{name}'"))),
        };
        Ok(self.inner.states.iter().map(pick).collect())
    }

    /// Jamming limits read off the endpoint (needs t_max >= 20).
    fn limits(&self) -> PyResult<PyLimitSummary> {
        let limits = ode::extract_limits(&self.inner).map_err(value_err)?;
        Ok(PyLimitSummary {
            line1: limits.line1,
            line2: limits.line2,
            increase_factor: limits.increase_factor,
            residual_drift: limits.residual_drift,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.times.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory(model='{}', points={}, t_end={})",
            self.inner.model,
            self.inner.times.len(),
            self.inner.end_time()
        )
    }
}

/// Integrate the density ODE system with fixed-step RK4.
#[pyfunction]
#[pyo3(signature = (model, t_max=30.0, step=1e-3, record_stride=250))]
fn integrate(model: &str, t_max: f64, step: f64, record_stride: usize) -> PyResult<PyTrajectory> {
    let spec = ode::OdeSpec {
        model: parse_model(model)?,
        t_max,
        step,
        record_stride,
    };
    Ok(PyTrajectory {
        inner: ode::integrate(&spec).map_err(value_err)?,
    })
}

/// Replica-averaged densities at one sample time.
#[pyclass(name = "SamplePoint", get_all, skip_from_py_object)]
#[derive(Clone)]
struct PySamplePoint {
    time: f64,
    /// Mean fraction of sites in states 0..=3.
    density_mean: Vec<f64>,
    density_stderr: Vec<f64>,
    line1_mean: f64,
    line1_stderr: f64,
    line2_mean: f64,
    line2_stderr: f64,
    /// (pattern string, mean, stderr) per requested pattern.
    patterns: Vec<(String, f64, f64)>,
}

#[pymethods]
impl PySamplePoint {
    fn __repr__(&self) -> String {
        format!(
            "SamplePoint(time={}, line1={}, line2={})",
            self.time, self.line1_mean, self.line2_mean
        )
    }
}

/// Simulate the parking process and aggregate densities over replicas.
#[pyfunction]
#[pyo3(signature = (model, sites=10_000, t_max=15.0, replicas=100, seed=12345,
                    sample_times=None, frozen=None, patterns=None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    model: &str,
    sites: usize,
    t_max: f64,
    replicas: usize,
    seed: u64,
    sample_times: Option<Vec<f64>>,
    frozen: Option<Vec<usize>>,
    patterns: Option<Vec<Vec<u8>>>,
) -> PyResult<Vec<PySamplePoint>> {
    let mut config = SimConfig::new(parse_model(model)?, sites, t_max, seed, replicas);
    if let Some(times) = sample_times {
        config.sample_times = times;
    }
    if let Some(frozen) = frozen {
        config.frozen_sites = frozen;
    }
    if let Some(patterns) = patterns {
        config.patterns = patterns
            .iter()
            .map(|p| parse_pattern(p))
            .collect::<PyResult<_>>()?;
    }
    let samples = simulator::run_aggregated(&config).map_err(value_err)?;
    Ok(samples
        .into_iter()
        .map(|s| PySamplePoint {
            time: s.time,
            density_mean: s.site_density.iter().map(|e| e.mean).collect(),
            density_stderr: s.site_density.iter().map(|e| e.stderr).collect(),
            line1_mean: s.line1.mean,
            line1_stderr: s.line1.stderr,
            line2_mean: s.line2.mean,
            line2_stderr: s.line2.stderr,
            patterns: s
                .patterns
                .iter()
                .map(|(p, e)| {
                    let codes: Vec<String> = p.iter().map(|s| s.code().to_string()).collect();
                    (codes.join(","), e.mean, e.stderr)
                })
                .collect(),
        })
        .collect())
}

/// One-sided densities next to a frozen site at one sample time.
#[pyclass(name = "OneSidedPoint", get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyOneSidedPoint {
    time: f64,
    /// Means of the indicators of m1 = 0, 1, 2.
    f_mean: Vec<f64>,
    f_stderr: Vec<f64>,
    f3_mean: f64,
    f3_stderr: f64,
    r_mean: f64,
    r_stderr: f64,
    f02_mean: f64,
    f02_stderr: f64,
}

#[pymethods]
impl PyOneSidedPoint {
    fn __repr__(&self) -> String {
        format!(
            "OneSidedPoint(time={}, f={:?})",
            self.time, self.f_mean
        )
    }
}

/// Estimate the one-sided densities f(s) and R with frozen sites
/// (default {0}; use (0, 2) for the doubly conditioned geometry).
#[pyfunction]
#[pyo3(signature = (model, sites=1000, t_max=2.0, replicas=20_000, seed=12345,
                    sample_times=None, frozen=None))]
fn one_sided(
    model: &str,
    sites: usize,
    t_max: f64,
    replicas: usize,
    seed: u64,
    sample_times: Option<Vec<f64>>,
    frozen: Option<Vec<usize>>,
) -> PyResult<Vec<PyOneSidedPoint>> {
    let mut config = SimConfig::new(parse_model(model)?, sites, t_max, seed, replicas);
    if let Some(times) = sample_times {
        config.sample_times = times;
    }
    config.frozen_sites = frozen.unwrap_or_else(|| vec![0]);
    let samples = simulator::run_one_sided(&config).map_err(value_err)?;
    Ok(samples
        .into_iter()
        .map(|s| PyOneSidedPoint {
            time: s.time,
            f_mean: s.f.iter().map(|e| e.mean).collect(),
            f_stderr: s.f.iter().map(|e| e.stderr).collect(),
            f3_mean: s.f3.mean,
            f3_stderr: s.f3.stderr,
            r_mean: s.r.mean,
            r_stderr: s.r.stderr,
            f02_mean: s.f02.mean,
            f02_stderr: s.f02.stderr,
        })
        .collect())
}

/// Exact single-site densities [D(0), D(1), D(2), D(3)] of an N-ring
/// (3 <= N <= 8) at time t.
#[pyfunction]
fn oracle_site_density(model: &str, sites: usize, t: f64) -> PyResult<Vec<f64>> {
    let gen = oracle::build_generator(parse_model(model)?, sites).map_err(value_err)?;
    let dist = oracle::evolve(&gen, t).map_err(value_err)?;
    Ok(dist.site_density().to_vec())
}

/// Exact probability that consecutive sites of an N-ring show `pattern`
/// at time t.
#[pyfunction]
fn oracle_marginal(model: &str, sites: usize, t: f64, pattern: Vec<u8>) -> PyResult<f64> {
    let gen = oracle::build_generator(parse_model(model)?, sites).map_err(value_err)?;
    let dist = oracle::evolve(&gen, t).map_err(value_err)?;
    dist.marginal(&parse_pattern(&pattern)?).map_err(value_err)
}

#[pymodule]
fn parking_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(transition_rate, m)?)?;
    m.add_function(wrap_pyfunction!(attempt_outcome, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_fsum, m)?)?;
    m.add_function(wrap_pyfunction!(derive_replica_seed, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(one_sided, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_site_density, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_marginal, m)?)?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyLimitSummary>()?;
    m.add_class::<PySamplePoint>()?;
    m.add_class::<PyOneSidedPoint>()?;
    Ok(())
}
