//! Command-line front end: `simulate`, `criteria`, `characteristics`,
//! `wave` and `scan`, each driven by a flat TOML file.
//!
//! Exit status is 0 on success, 1 on usage or configuration errors and 2
//! on numerical failure.

mod config;
pub mod plots;
mod scan;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand};
use serde_json::{json, Value};

pub use config::{RunConfig, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV};
pub use scan::{
    region_map_csv, scan, scan_csv, AxisRange, ScanConfig, ScanPoint, ScanResult,
    REGION_MAP_HEADER, SCAN_HEADER,
};

use crate::characteristics::{self, track, TrackRun};
use crate::criteria::{evaluate_all, InitialData};
use crate::error::Error;
use crate::evolution::{self, estimate_blowup, simulate, Termination};
use crate::wave;

#[derive(Debug, Parser)]
#[command(
    name = "ohwave",
    version,
    about = "Wave-breaking lab for u_t + u u_x = gamma d_x^{-1} u"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// TOML run description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `output_dir` and the environment default.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one two-mode initial datum and fit the blow-up law.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the analytic breaking criteria.
    Criteria {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Co-integrate characteristics with the spectral solution.
    Characteristics {
        #[command(flatten)]
        common: Common,
    },
    /// Solve for a periodic traveling wave.
    Wave {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        c_over_gamma: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Criteria (and optionally simulations) over an (a, b) grid.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_)
            | Error::InvalidGrid(_)
            | Error::NegativeParameter { .. }
            | Error::SpeedOutOfRange(_)
            | Error::NotApplicable(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn numerical(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
            0
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == 1 {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            f.code
        }
    }
}

fn load(common: &Common, required: bool) -> Result<RunConfig, Failure> {
    match &common.config {
        Some(path) => Ok(RunConfig::load(path)?),
        None if required => Err(usage_error("--config <FILE> is required")),
        None => Ok(RunConfig::default()),
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(config: &RunConfig, flag: Option<&Path>) -> Result<Self, Failure> {
        let dir = config.output_dir(flag);
        std::fs::create_dir_all(&dir)
            .map_err(|e| usage_error(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir })
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| usage_error(format!("cannot write {}: {e}", path.display())))
    }

    fn json(&self, name: &str, value: &Value) -> Result<(), Failure> {
        self.write(name, &(serde_json::to_string_pretty(value).unwrap() + "\n"))
    }
}

fn run(command: Command) -> Result<Value, Failure> {
    match command {
        Command::Simulate { common } => run_simulate(&common),
        Command::Criteria {
            common,
            a,
            b,
            gamma,
        } => run_criteria(&common, a, b, gamma),
        Command::Characteristics { common } => run_characteristics(&common),
        Command::Wave {
            common,
            c_over_gamma,
            gamma,
        } => run_wave(&common, c_over_gamma, gamma),
        Command::Scan { common, workers } => run_scan(&common, workers),
    }
}

fn run_simulate(common: &Common) -> Result<Value, Failure> {
    let config = load(common, true)?;
    let sim = config.simulation()?;
    let out = Output::new(&config, common.output_dir.as_deref())?;
    let record = simulate(&sim)?;
    let estimate = estimate_blowup(&record).ok();
    out.write("timeseries.csv", &evolution::io::timeseries_csv(&record))?;
    out.write("plot_timeseries.py", plots::TIMESERIES)?;
    for (i, (_, field)) in record.snapshots.iter().enumerate() {
        out.write(
            &format!("snapshot_{i:03}.csv"),
            &evolution::io::snapshot_csv(field),
        )?;
    }
    let mut summary = evolution::io::run_summary(&sim, &record, estimate.as_ref());
    summary["snapshots"] = json!(record.snapshots.iter().map(|s| s.0).collect::<Vec<_>>());
    if let Some(est) = &estimate {
        if let Ok(rates) = characteristics::rate_products(&record, est) {
            out.write("rates.csv", &characteristics::rates_csv(&rates))?;
            out.write("plot_rates.py", plots::RATES)?;
        }
    }
    out.json("summary.json", &summary)?;
    if record.terminated == Termination::NumericalFailure {
        return Err(numerical(
            record.failure.unwrap_or_else(|| "numerical failure".into()),
        ));
    }
    Ok(summary)
}

fn run_criteria(
    common: &Common,
    a: Option<f64>,
    b: Option<f64>,
    gamma: Option<f64>,
) -> Result<Value, Failure> {
    let mut config = load(common, false)?;
    config.a = a.or(config.a);
    config.b = b.or(config.b);
    config.gamma = gamma.or(config.gamma);
    let (a, b) = config.two_mode()?;
    let gamma = config.gamma();
    if !(gamma > 0.0) {
        return Err(usage_error("gamma must be positive"));
    }
    let data = InitialData::two_mode(a, b)?;
    let set = evaluate_all(&data, gamma);
    let summary = json!({
        "a": a,
        "b": b,
        "gamma": gamma,
        "initial": {
            "sup_abs": data.sup_abs,
            "l2": data.l2,
            "min_slope": data.min_slope,
            "max_slope": data.max_slope,
            "cube": data.cube,
        },
        "criteria": set,
    });
    if common.output_dir.is_some() || config.output_dir.is_some() {
        let out = Output::new(&config, common.output_dir.as_deref())?;
        out.json("criteria.json", &summary)?;
    }
    Ok(summary)
}

pub const CHECKS_HEADER: &str =
    "t,consistency,min_v,grid_min_ux,diffeomorphic,max_abs_g,stretch_error,riccati_excess";

pub fn checks_csv(run: &TrackRun) -> String {
    let mut out = format!("{CHECKS_HEADER}\n");
    for s in &run.samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.t,
            s.consistency,
            s.min_v,
            s.grid_min_ux,
            s.diffeomorphic as u8,
            s.max_abs_g,
            s.stretch_error,
            s.riccati_excess
        )
        .unwrap();
    }
    out
}

fn run_characteristics(common: &Common) -> Result<Value, Failure> {
    let config = load(common, true)?;
    let tracking = config.tracking()?;
    let out = Output::new(&config, common.output_dir.as_deref())?;
    let run = track(&tracking)?;
    let mut snapshots = run.snapshots.clone();
    if snapshots.last().map(|e| e.t) != Some(run.final_ensemble.t) {
        snapshots.push(run.final_ensemble.clone());
    }
    out.write(
        "characteristics.csv",
        &characteristics::ensemble_csv(&snapshots),
    )?;
    out.write("checks.csv", &checks_csv(&run))?;
    out.write("plot_characteristics.py", plots::CHARACTERISTICS)?;
    let fold = |f: &dyn Fn(&characteristics::TrackSample) -> f64| {
        run.samples.iter().map(f).fold(0.0, f64::max)
    };
    let summary = json!({
        "config": tracking.simulation.describe(),
        "n_xi": run.final_ensemble.len(),
        "t_end": run.final_ensemble.t,
        "blowup": run.blowup,
        "max_consistency": fold(&|s| s.consistency),
        "max_slope_mismatch": fold(&|s| (s.min_v - s.grid_min_ux).abs()),
        "max_stretch_error": fold(&|s| s.stretch_error),
        "max_riccati_excess": run.samples.iter().map(|s| s.riccati_excess).fold(f64::NEG_INFINITY, f64::max),
        "diffeomorphic": run.samples.iter().all(|s| s.diffeomorphic),
    });
    out.json("summary.json", &summary)?;
    Ok(summary)
}

fn run_wave(common: &Common, ratio: Option<f64>, gamma: Option<f64>) -> Result<Value, Failure> {
    let mut config = load(common, false)?;
    config.c_over_gamma = ratio.or(config.c_over_gamma);
    config.gamma = gamma.or(config.gamma);
    let gamma = config.gamma();
    let ratio = config.c_over_gamma.unwrap_or(1.05);
    let options = config.wave_options();
    let out = Output::new(&config, common.output_dir.as_deref())?;
    let w = wave::solve_periodic_wave(ratio * gamma, gamma, None, &options)?;
    let corner = wave::corner_wave(gamma, options.n.max(256))?;
    out.write("profile.csv", &wave::profile_csv(&w))?;
    out.write("corner.csv", &wave::profile_csv(&corner))?;
    out.write("plot_wave.py", plots::WAVE)?;
    let mut summary = json!({
        "gamma": gamma,
        "c_over_gamma": ratio,
        "n": w.len(),
        "iterations": w.iterations,
        "residual": wave::ode_residual(&w)?,
        "amplitude": w.amplitude(),
        "max": w.phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        "corner_residual": wave::ode_residual(&corner)?,
        "corner_max": corner.phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    });
    if let Some(ratios) = &config.branch {
        let branch = wave::wave_branch(gamma, ratios, &options)?;
        out.write("branch.csv", &wave::branch_csv(&branch))?;
        summary["branch_points"] = json!(branch.len());
    }
    out.json("wave.json", &summary)?;
    Ok(summary)
}

fn scan_config(config: &RunConfig, workers: Option<usize>) -> Result<ScanConfig, Failure> {
    let simulation = if config.simulate.unwrap_or(false) {
        Some(config.simulation_at(0.0, 0.0)?)
    } else {
        None
    };
    let default_workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    Ok(ScanConfig {
        a: AxisRange::new(
            config.a_min.unwrap_or(0.0),
            config.a_max.unwrap_or(0.2),
            config.a_count.unwrap_or(41),
        ),
        b: AxisRange::new(
            config.b_min.unwrap_or(0.0),
            config.b_max.unwrap_or(0.2),
            config.b_count.unwrap_or(41),
        ),
        gamma: config.gamma(),
        simulation,
        workers: workers.or(config.workers).unwrap_or(default_workers),
    })
}

fn run_scan(common: &Common, workers: Option<usize>) -> Result<Value, Failure> {
    let config = load(common, true)?;
    let sc = scan_config(&config, workers)?;
    let out = Output::new(&config, common.output_dir.as_deref())?;
    let result = scan(&sc)?;
    out.write("region_map.csv", &region_map_csv(&result))?;
    out.write("scan.csv", &scan_csv(&result))?;
    out.write("plot_region_map.py", plots::REGION_MAP)?;
    let count = |f: &dyn Fn(&ScanPoint) -> bool| result.points.iter().filter(|p| f(p)).count();
    let summary = json!({
        "gamma": sc.gamma,
        "a": sc.a,
        "b": sc.b,
        "points": result.points.len(),
        "simulated": sc.simulation.is_some(),
        "charac_satisfied": count(&|p| p.criteria.as_ref().is_some_and(|c| c.charac.satisfied)),
        "cond1_satisfied": count(&|p| p.criteria.as_ref().is_some_and(|c| c.cond1.satisfied)),
        "failures": count(&|p| p.terminated == "NumericalFailure" || p.terminated == "error"),
    });
    out.json("scan.json", &summary)?;
    Ok(summary)
}
