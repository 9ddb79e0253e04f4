use serde::Serialize;

use crate::criteria::InitialData;
use crate::error::{Error, Result};
use crate::evolution::solver::{Diagnostics, Model, Solver};
use crate::fourier::{PeriodicField, PeriodicGrid};

/// Slack added to the `L^inf` growth bound before a run is flagged.
pub const BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub gamma: f64,
    pub n: usize,
    pub dt: f64,
    pub t_max: f64,
    pub dealias: bool,
    /// Runs stop once `min u_x` falls to this level.
    pub stop_slope: f64,
    /// Runs also stop once a steepened front is no longer resolved: the
    /// spectral tail share exceeds this level and 100 times its initial value
    /// while `min u_x` is below twice its initial value.
    pub tail_limit: f64,
    pub initial: InitialData,
    /// Diagnostics are recorded every `stride` steps.
    pub stride: usize,
    pub snapshot_times: Vec<f64>,
    pub nonlinear: bool,
}

impl SimulationConfig {
    pub fn new(initial: InitialData, t_max: f64) -> Self {
        Self {
            gamma: 1.0,
            n: 4096,
            dt: 0.001,
            t_max,
            dealias: true,
            stop_slope: -200.0,
            tail_limit: 1e-3,
            initial,
            stride: 1,
            snapshot_times: Vec::new(),
            nonlinear: true,
        }
    }

    pub fn two_mode(a: f64, b: f64, t_max: f64) -> Result<Self> {
        Ok(Self::new(InitialData::two_mode(a, b)?, t_max))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.gamma > 0.0) {
            return bad("gamma must be positive");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.t_max > 0.0) {
            return bad("t_max must be positive");
        }
        if !(self.stop_slope < 0.0) {
            return bad("stop_slope must be negative");
        }
        if !(self.tail_limit > 0.0) {
            return bad("tail_limit must be positive");
        }
        if self.stride == 0 {
            return bad("stride must be at least 1");
        }
        PeriodicGrid::unit(self.n)?;
        Ok(())
    }

    pub fn front_unresolved(&self, d: &Diagnostics, d0: &Diagnostics) -> bool {
        d.tail > self.tail_limit && d.tail > 100.0 * d0.tail && d.min_ux < 2.0 * d0.min_ux
    }

    pub fn model(&self) -> Model {
        Model {
            gamma: self.gamma,
            dealias: self.dealias,
            nonlinear: self.nonlinear,
        }
    }

    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "gamma": self.gamma,
            "n": self.n,
            "dt": self.dt,
            "t_max": self.t_max,
            "dealias": self.dealias,
            "stop_slope": self.stop_slope,
            "tail_limit": self.tail_limit,
            "stride": self.stride,
            "nonlinear": self.nonlinear,
            "initial": self.initial.describe(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    Horizon,
    SlopeBlowup,
    NumericalFailure,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Horizon => "Horizon",
            Termination::SlopeBlowup => "SlopeBlowup",
            Termination::NumericalFailure => "NumericalFailure",
        }
    }
}

/// Time series of one run. All sequences share one length.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub gamma: f64,
    pub times: Vec<f64>,
    pub min_ux: Vec<f64>,
    pub max_ux: Vec<f64>,
    pub sup_abs_u: Vec<f64>,
    /// `int u` (the initial mass is zero).
    pub mass_drift: Vec<f64>,
    /// `(Q - Q0) / Q0`
    pub q_drift: Vec<f64>,
    /// `(E - E0) / |E0|`
    pub e_drift: Vec<f64>,
    pub tail: Vec<f64>,
    pub snapshots: Vec<(f64, PeriodicField)>,
    pub terminated: Termination,
    pub failure: Option<String>,
    /// `sup |u0|`, `||u0||_2` and `sup u0'` of the projected initial field.
    pub sup0: f64,
    pub l2_0: f64,
    pub max_slope0: f64,
}

impl SimulationRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `||u0||_inf + gamma t ||u0||_2`
    pub fn sup_bound(&self, t: f64) -> f64 {
        self.sup0 + self.gamma * t * self.l2_0
    }

    /// `sup u0' + gamma (t ||u0||_inf + gamma t^2 ||u0||_2 / 2)`
    pub fn max_slope_bound(&self, t: f64) -> f64 {
        self.max_slope0 + self.gamma * (t * self.sup0 + 0.5 * self.gamma * t * t * self.l2_0)
    }

    fn push(&mut self, t: f64, d: &Diagnostics, q0: f64, e0: f64) {
        let relative = |v: f64, v0: f64| {
            if v0.abs() > 0.0 {
                (v - v0) / v0.abs()
            } else {
                v - v0
            }
        };
        self.times.push(t);
        self.min_ux.push(d.min_ux);
        self.max_ux.push(d.max_ux);
        self.sup_abs_u.push(d.sup_u);
        self.mass_drift.push(d.mass);
        self.q_drift.push(relative(d.q, q0));
        self.e_drift.push(relative(d.e, e0));
        self.tail.push(d.tail);
    }
}

/// Integrates until the horizon, slope blow-up or a numerical failure.
/// Numerical failures are recorded in the result, not returned as errors.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationRecord> {
    config.validate()?;
    let grid = PeriodicGrid::unit(config.n)?;
    let u0 = config.initial.sample(grid)?;
    let scalars = InitialData::sampled(&u0);
    let mut solver = Solver::new(grid, config.model());
    let mut uhat = u0.coefficients().to_vec();
    solver.project(&mut uhat);

    let d0 = solver.diagnostics(&uhat);
    let mut record = SimulationRecord {
        gamma: config.gamma,
        times: Vec::new(),
        min_ux: Vec::new(),
        max_ux: Vec::new(),
        sup_abs_u: Vec::new(),
        mass_drift: Vec::new(),
        q_drift: Vec::new(),
        e_drift: Vec::new(),
        tail: Vec::new(),
        snapshots: Vec::new(),
        terminated: Termination::Horizon,
        failure: None,
        sup0: scalars.sup_abs,
        l2_0: scalars.l2,
        max_slope0: scalars.max_slope,
    };
    record.push(0.0, &d0, d0.q, d0.e);

    let mut pending: Vec<f64> = config.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    let mut pending = pending.into_iter().peekable();
    let mut take_snapshots = |t: f64,
                              uhat: &[num_complex::Complex64],
                              record: &mut SimulationRecord| {
        while let Some(&ts) = pending.peek() {
            if ts > t + 1e-9 * config.dt {
                break;
            }
            pending.next();
            let field = PeriodicField::from_coefficients(grid, uhat.to_vec()).expect("grid size");
            record.snapshots.push((t, field));
        }
    };
    take_snapshots(0.0, &uhat, &mut record);

    let full_steps = (config.t_max / config.dt * (1.0 - 1e-12)).floor() as u64;
    let remainder = config.t_max - full_steps as f64 * config.dt;
    let total = if remainder > 1e-12 * config.dt {
        full_steps + 1
    } else {
        full_steps
    };

    for step in 1..=total {
        let (t, dt) = if step > full_steps {
            (config.t_max, remainder)
        } else {
            (step as f64 * config.dt, config.dt)
        };
        if let Err(e) = solver.step_in_place(&mut uhat, dt) {
            record.terminated = Termination::NumericalFailure;
            record.failure = Some(e.to_string());
            break;
        }
        let d = solver.diagnostics(&uhat);
        let last = step == total;
        if !d.is_finite() {
            record.terminated = Termination::NumericalFailure;
            record.failure = Some(format!("non-finite diagnostics at t = {t}"));
            break;
        }
        if d.sup_u > record.sup_bound(t) + BOUND_TOL {
            record.push(t, &d, d0.q, d0.e);
            record.terminated = Termination::NumericalFailure;
            record.failure = Some(format!(
                "sup |u| = {} exceeds the growth bound {} at t = {t}",
                d.sup_u,
                record.sup_bound(t)
            ));
            break;
        }
        let blowup = d.min_ux <= config.stop_slope || config.front_unresolved(&d, &d0);
        if blowup || last || step % config.stride as u64 == 0 {
            record.push(t, &d, d0.q, d0.e);
        }
        take_snapshots(t, &uhat, &mut record);
        if blowup {
            record.terminated = Termination::SlopeBlowup;
            let field = PeriodicField::from_coefficients(grid, uhat.clone()).expect("grid size");
            if record.snapshots.last().map(|s| s.0) != Some(t) {
                record.snapshots.push((t, field));
            }
            break;
        }
    }
    Ok(record)
}
