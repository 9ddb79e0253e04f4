use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::characteristics::TrackConfig;
use crate::error::{Error, Result};
use crate::evolution::SimulationConfig;
use crate::wave::WaveSolverOptions;

pub const OUTPUT_DIR_ENV: &str = "OHWAVE_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "out";

/// Flat `key = value` run description shared by every subcommand. Keys a
/// subcommand does not use are ignored by it.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gamma: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub stop_slope: Option<f64>,
    pub tail_limit: Option<f64>,
    pub dealias: Option<bool>,
    pub stride: Option<usize>,
    pub snapshot_times: Option<Vec<f64>>,
    pub n_xi: Option<usize>,
    pub refine_cells: Option<usize>,
    pub sample_every: Option<usize>,
    pub snapshot_every: Option<usize>,
    pub output_dir: Option<PathBuf>,

    pub c_over_gamma: Option<f64>,
    pub branch: Option<Vec<f64>>,
    pub wave_n: Option<usize>,
    pub wave_max_n: Option<usize>,

    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub a_count: Option<usize>,
    pub b_min: Option<f64>,
    pub b_max: Option<f64>,
    pub b_count: Option<usize>,
    pub simulate: Option<bool>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(1.0)
    }

    /// Flag, then config key, then environment, then `./out`.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output_dir {
            return p.clone();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }

    fn require(value: Option<f64>, key: &str) -> Result<f64> {
        value.ok_or_else(|| Error::InvalidConfig(format!("missing key `{key}`")))
    }

    /// Simulation of the two-mode data at `(a, b)` (defaulting to the keys).
    pub fn simulation_at(&self, a: f64, b: f64) -> Result<SimulationConfig> {
        let t_max = Self::require(self.t_max, "t_max")?;
        let mut c = SimulationConfig::two_mode(a, b, t_max)?;
        c.gamma = self.gamma();
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.dt {
            c.dt = v;
        }
        if let Some(v) = self.stop_slope {
            c.stop_slope = v;
        }
        if let Some(v) = self.tail_limit {
            c.tail_limit = v;
        }
        if let Some(v) = self.dealias {
            c.dealias = v;
        }
        if let Some(v) = self.stride {
            c.stride = v;
        }
        if let Some(v) = &self.snapshot_times {
            c.snapshot_times = v.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn two_mode(&self) -> Result<(f64, f64)> {
        Ok((Self::require(self.a, "a")?, Self::require(self.b, "b")?))
    }

    pub fn simulation(&self) -> Result<SimulationConfig> {
        let (a, b) = self.two_mode()?;
        self.simulation_at(a, b)
    }

    pub fn tracking(&self) -> Result<TrackConfig> {
        let mut t = TrackConfig::new(self.simulation()?);
        if let Some(v) = self.n_xi {
            t.n_xi = v;
        }
        if let Some(v) = self.refine_cells {
            t.refine_cells = v;
        }
        if let Some(v) = self.sample_every {
            t.sample_every = v;
        }
        if let Some(v) = self.snapshot_every {
            t.snapshot_every = v;
        }
        Ok(t)
    }

    pub fn wave_options(&self) -> WaveSolverOptions {
        let mut o = WaveSolverOptions::default();
        if let Some(v) = self.wave_n {
            o.n = v;
        }
        if let Some(v) = self.wave_max_n {
            o.max_n = v;
        }
        o
    }
}
