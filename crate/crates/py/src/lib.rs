//! Python bindings: two-mode simulations, the breaking criteria,
//! characteristics runs, traveling waves and parameter scans.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ohwave::characteristics::{track as track_run, TrackConfig};
use ohwave::cli::{region_map_csv, scan_csv, AxisRange, ScanConfig};
use ohwave::criteria::{self as crit, InitialData as CoreInitial};
use ohwave::evolution::{estimate_blowup, simulate as run_simulation, SimulationConfig};
use ohwave::wave::{self, WaveSolverOptions};
use ohwave::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidConfig(_)
        | Error::InvalidGrid(_)
        | Error::NegativeParameter { .. }
        | Error::SpeedOutOfRange(_)
        | Error::NotApplicable(_)
        | Error::DegenerateData(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Closed-form scalars of `a cos 2 pi x + b sin 4 pi x`.
#[pyclass(frozen, get_all)]
struct InitialData {
    sup_abs: f64,
    l2: f64,
    min_slope: f64,
    max_slope: f64,
    cube: f64,
}

#[pymethods]
impl InitialData {
    #[new]
    fn new(a: f64, b: f64) -> PyResult<Self> {
        CoreInitial::two_mode(a, b).map(Self::from).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "InitialData(sup_abs={}, l2={}, min_slope={}, max_slope={}, cube={})",
            self.sup_abs, self.l2, self.min_slope, self.max_slope, self.cube
        )
    }
}

impl From<CoreInitial> for InitialData {
    fn from(d: CoreInitial) -> Self {
        Self {
            sup_abs: d.sup_abs,
            l2: d.l2,
            min_slope: d.min_slope,
            max_slope: d.max_slope,
            cube: d.cube,
        }
    }
}

#[pyclass(frozen, get_all)]
struct CriterionReport {
    name: String,
    satisfied: bool,
    margin: f64,
    time_bound: Option<f64>,
    epsilon: Option<f64>,
}

#[pymethods]
impl CriterionReport {
    fn __repr__(&self) -> String {
        format!(
            "CriterionReport(name={:?}, satisfied={}, margin={})",
            self.name, self.satisfied, self.margin
        )
    }
}

impl From<crit::CriterionReport> for CriterionReport {
    fn from(r: crit::CriterionReport) -> Self {
        Self {
            name: r.name.to_string(),
            satisfied: r.satisfied,
            margin: r.margin,
            time_bound: r.time_bound,
            epsilon: r.epsilon,
        }
    }
}

/// Reports keyed by `hunter`, `cond1`, `cond2` and `charac`. `hunter` is
/// absent unless `gamma == 1`.
#[pyfunction]
#[pyo3(signature = (a, b, gamma = 1.0))]
fn criteria<'py>(py: Python<'py>, a: f64, b: f64, gamma: f64) -> PyResult<Bound<'py, PyDict>> {
    if !(gamma > 0.0) {
        return Err(PyValueError::new_err("gamma must be positive"));
    }
    let data = CoreInitial::two_mode(a, b).map_err(to_py)?;
    let set = crit::evaluate_all(&data, gamma);
    let out = PyDict::new(py);
    if let Some(h) = set.hunter {
        out.set_item("hunter", CriterionReport::from(h))?;
    }
    out.set_item("cond1", CriterionReport::from(set.cond1))?;
    out.set_item("cond2", CriterionReport::from(set.cond2))?;
    out.set_item("charac", CriterionReport::from(set.charac))?;
    Ok(out)
}

#[pyfunction]
fn find_t1(sup_abs: f64, l2: f64, gamma: f64, epsilon: f64) -> PyResult<f64> {
    crit::find_t1(sup_abs, l2, gamma, epsilon).map_err(to_py)
}

#[pyclass(frozen, get_all)]
struct Simulation {
    times: Vec<f64>,
    min_ux: Vec<f64>,
    max_ux: Vec<f64>,
    sup_abs_u: Vec<f64>,
    mass: Vec<f64>,
    q_drift: Vec<f64>,
    e_drift: Vec<f64>,
    terminated: String,
    failure: Option<String>,
    /// Fitted `-1 / min_ux = B + C t`, or `None` without a fit window.
    b: Option<f64>,
    c: Option<f64>,
    t_blowup: Option<f64>,
}

#[pyfunction]
#[pyo3(signature = (a, b, t_max, n = 4096, dt = 0.001, gamma = 1.0, stop_slope = -200.0, nonlinear = true))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    a: f64,
    b: f64,
    t_max: f64,
    n: usize,
    dt: f64,
    gamma: f64,
    stop_slope: f64,
    nonlinear: bool,
) -> PyResult<Simulation> {
    let mut config = SimulationConfig::two_mode(a, b, t_max).map_err(to_py)?;
    config.n = n;
    config.dt = dt;
    config.gamma = gamma;
    config.stop_slope = stop_slope;
    config.nonlinear = nonlinear;
    let record = py.detach(|| run_simulation(&config)).map_err(to_py)?;
    let fit = estimate_blowup(&record).ok();
    Ok(Simulation {
        terminated: record.terminated.as_str().to_string(),
        failure: record.failure.clone(),
        b: fit.as_ref().map(|f| f.b),
        c: fit.as_ref().map(|f| f.c),
        t_blowup: fit.as_ref().map(|f| f.t_zero()),
        times: record.times,
        min_ux: record.min_ux,
        max_ux: record.max_ux,
        sup_abs_u: record.sup_abs_u,
        mass: record.mass_drift,
        q_drift: record.q_drift,
        e_drift: record.e_drift,
    })
}

/// Worst-case cross-checks of a characteristics run.
#[pyfunction]
#[pyo3(signature = (a, b, t_max, n = 1024, dt = 0.001, gamma = 1.0, n_xi = 256))]
#[allow(clippy::too_many_arguments)]
fn characteristics<'py>(
    py: Python<'py>,
    a: f64,
    b: f64,
    t_max: f64,
    n: usize,
    dt: f64,
    gamma: f64,
    n_xi: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mut sim = SimulationConfig::two_mode(a, b, t_max).map_err(to_py)?;
    sim.n = n;
    sim.dt = dt;
    sim.gamma = gamma;
    let mut config = TrackConfig::new(sim);
    config.n_xi = n_xi;
    let run = py.detach(|| track_run(&config)).map_err(to_py)?;
    let worst = |f: &dyn Fn(&ohwave::characteristics::TrackSample) -> f64| {
        run.samples.iter().map(f).fold(0.0, f64::max)
    };
    let out = PyDict::new(py);
    out.set_item("t_end", run.final_ensemble.t)?;
    out.set_item("blowup", run.blowup)?;
    out.set_item("max_consistency", worst(&|s| s.consistency))?;
    out.set_item(
        "max_slope_mismatch",
        worst(&|s| (s.min_v - s.grid_min_ux).abs()),
    )?;
    out.set_item("diffeomorphic", run.samples.iter().all(|s| s.diffeomorphic))?;
    out.set_item("x", run.final_ensemble.x.clone())?;
    out.set_item("v", run.final_ensemble.v.clone())?;
    Ok(out)
}

#[pyclass(frozen, get_all)]
struct WaveProfile {
    x: Vec<f64>,
    phi: Vec<f64>,
    c: f64,
    gamma: f64,
    iterations: usize,
    residual: f64,
}

impl WaveProfile {
    fn from_core(w: wave::WaveProfile) -> PyResult<Self> {
        let residual = wave::ode_residual(&w).map_err(to_py)?;
        Ok(Self {
            x: (0..w.len()).map(|j| w.abscissa(j)).collect(),
            c: w.c,
            gamma: w.gamma,
            iterations: w.iterations,
            residual,
            phi: w.phi,
        })
    }
}

/// Smooth periodic traveling wave with speed `c_over_gamma * gamma`.
#[pyfunction]
#[pyo3(signature = (c_over_gamma, gamma = 1.0, n = 128, max_n = 1024))]
fn solve_wave(
    py: Python<'_>,
    c_over_gamma: f64,
    gamma: f64,
    n: usize,
    max_n: usize,
) -> PyResult<WaveProfile> {
    let options = WaveSolverOptions {
        n,
        max_n,
        ..Default::default()
    };
    let w = py
        .detach(|| wave::solve_periodic_wave(c_over_gamma * gamma, gamma, None, &options))
        .map_err(to_py)?;
    WaveProfile::from_core(w)
}

#[pyfunction]
#[pyo3(signature = (gamma = 1.0, n = 512))]
fn corner_wave(gamma: f64, n: usize) -> PyResult<WaveProfile> {
    WaveProfile::from_core(wave::corner_wave(gamma, n).map_err(to_py)?)
}

/// Criteria over an `(a, b)` grid; returns `(region_map_csv, scan_csv)`.
#[pyfunction]
#[pyo3(signature = (a_range, b_range, gamma = 1.0, workers = 1))]
fn scan(
    py: Python<'_>,
    a_range: (f64, f64, usize),
    b_range: (f64, f64, usize),
    gamma: f64,
    workers: usize,
) -> PyResult<(String, String)> {
    let mut config = ScanConfig::criteria_only(
        AxisRange::new(a_range.0, a_range.1, a_range.2),
        AxisRange::new(b_range.0, b_range.1, b_range.2),
        gamma,
    );
    config.workers = workers;
    let result = py.detach(|| ohwave::cli::scan(&config)).map_err(to_py)?;
    Ok((region_map_csv(&result), scan_csv(&result)))
}

#[pymodule]
fn ohwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<InitialData>()?;
    m.add_class::<CriterionReport>()?;
    m.add_class::<Simulation>()?;
    m.add_class::<WaveProfile>()?;
    m.add_function(wrap_pyfunction!(criteria, m)?)?;
    m.add_function(wrap_pyfunction!(find_t1, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(characteristics, m)?)?;
    m.add_function(wrap_pyfunction!(solve_wave, m)?)?;
    m.add_function(wrap_pyfunction!(corner_wave, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    Ok(())
}
