use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{evaluate_all, CriteriaSet, InitialData};
use crate::error::{Error, Result};
use crate::evolution::{estimate_blowup, simulate, SimulationConfig};

pub const REGION_MAP_HEADER: &str = "a,b,hunter,cond1,cond2,charac,margin_charac";
pub const SCAN_HEADER: &str = "a,b,hunter,cond1,cond2,charac,T_est,C_est,terminated";

/// `count` evenly spaced values on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidConfig(format!(
                "{name}_count must be at least 1"
            )));
        }
        if self.count > 1 && !(self.max > self.min) {
            return Err(Error::InvalidConfig(format!("{name} range is degenerate")));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub a: AxisRange,
    pub b: AxisRange,
    pub gamma: f64,
    /// Per-point simulation template; `None` evaluates the criteria only.
    /// Its initial data is replaced at every point.
    pub simulation: Option<SimulationConfig>,
    pub workers: usize,
}

impl ScanConfig {
    pub fn criteria_only(a: AxisRange, b: AxisRange, gamma: f64) -> Self {
        Self {
            a,
            b,
            gamma,
            simulation: None,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.a.validate("a")?;
        self.b.validate("b")?;
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig("gamma must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if self.a.min < 0.0 || self.b.min < 0.0 {
            return Err(Error::InvalidConfig(
                "scan ranges must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub a: f64,
    pub b: f64,
    pub criteria: Option<CriteriaSet>,
    /// Zero of the fitted blow-up line.
    pub t_est: Option<f64>,
    pub c_est: Option<f64>,
    /// Termination of the simulation, `skipped` without one, or `error`.
    pub terminated: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub gamma: f64,
    /// Row-major over `(a, b)` with `b` varying fastest.
    pub points: Vec<ScanPoint>,
}

fn evaluate_point(a: f64, b: f64, config: &ScanConfig) -> ScanPoint {
    let mut point = ScanPoint {
        a,
        b,
        criteria: None,
        t_est: None,
        c_est: None,
        terminated: "skipped".into(),
        error: None,
    };
    let data = match InitialData::two_mode(a, b) {
        Ok(d) => d,
        Err(e) => {
            point.terminated = "error".into();
            point.error = Some(e.to_string());
            return point;
        }
    };
    point.criteria = Some(evaluate_all(&data, config.gamma));
    if let Some(template) = &config.simulation {
        let mut sim = template.clone();
        sim.initial = data;
        sim.gamma = config.gamma;
        match simulate(&sim) {
            Ok(record) => {
                point.terminated = record.terminated.as_str().into();
                point.error = record.failure.clone();
                if let Ok(est) = estimate_blowup(&record) {
                    point.t_est = Some(est.t_zero());
                    point.c_est = Some(est.c);
                }
            }
            Err(e) => {
                point.terminated = "error".into();
                point.error = Some(e.to_string());
            }
        }
    }
    point
}

/// Evaluates every grid point on a pool of `workers` threads. The result
/// order is fixed by the grid, not by scheduling.
pub fn scan(config: &ScanConfig) -> Result<ScanResult> {
    config.validate()?;
    let grid: Vec<(f64, f64)> = (0..config.a.count)
        .flat_map(|i| (0..config.b.count).map(move |j| (i, j)))
        .map(|(i, j)| (config.a.value(i), config.b.value(j)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let points = pool.install(|| {
        grid.par_iter()
            .map(|&(a, b)| evaluate_point(a, b, config))
            .collect()
    });
    Ok(ScanResult {
        gamma: config.gamma,
        points,
    })
}

fn verdict(report: Option<&crate::criteria::CriterionReport>) -> &'static str {
    match report {
        Some(r) if r.satisfied => "1",
        Some(_) => "0",
        None => "",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn region_map_csv(result: &ScanResult) -> String {
    let mut out = format!("{REGION_MAP_HEADER}\n");
    for p in &result.points {
        let c = p.criteria.as_ref();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.a,
            p.b,
            verdict(c.and_then(|c| c.hunter.as_ref())),
            verdict(c.map(|c| &c.cond1)),
            verdict(c.map(|c| &c.cond2)),
            verdict(c.map(|c| &c.charac)),
            opt(c.map(|c| c.charac.margin)),
        )
        .unwrap();
    }
    out
}

pub fn scan_csv(result: &ScanResult) -> String {
    let mut out = format!("{SCAN_HEADER}\n");
    for p in &result.points {
        let c = p.criteria.as_ref();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.a,
            p.b,
            verdict(c.and_then(|c| c.hunter.as_ref())),
            verdict(c.map(|c| &c.cond1)),
            verdict(c.map(|c| &c.cond2)),
            verdict(c.map(|c| &c.charac)),
            opt(p.t_est),
            opt(p.c_est),
            p.terminated,
        )
        .unwrap();
    }
    out
}
