//! Characteristic curves `X' = U`, `U' = gamma G(X)`, `V' = -V^2 + gamma U`
//! co-stepped with the spectral solution, where `G = d_x^{-1} u`.
//!
//! `G` has no closed evolution law along a characteristic, so it is read
//! off the spectral field through a [`FieldProvider`].

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{
    BlowupEstimate, Model, SimulationConfig, SimulationRecord, Solver, MIN_WINDOW,
};
use crate::fourier::{
    antiderivative_zero_mean, mass_tol, refined_min, spectral_derivative, PeriodicField,
    PeriodicGrid, TrigInterpolant,
};

const INTERP_CUTOFF: f64 = 1e-16;

/// Characteristics seeded at `xi`; positions are kept in `[0, length)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicEnsemble {
    pub length: f64,
    pub t: f64,
    pub xi: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `int_0^t V`, i.e. `log d_xi X`.
    pub log_stretch: Vec<f64>,
}

impl CharacteristicEnsemble {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn min_v(&self) -> f64 {
        self.v.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `d_xi X` by centred differences of the unwrapped positions.
    pub fn stretch_from_positions(&self) -> Vec<f64> {
        let n = self.len();
        let l = self.length;
        (0..n)
            .map(|j| {
                let (p, q) = ((j + n - 1) % n, (j + 1) % n);
                let dx = (self.x[q] - self.x[p]).rem_euclid(l);
                let dxi = (self.xi[q] - self.xi[p]).rem_euclid(l);
                dx / dxi
            })
            .collect()
    }
}

fn require_zero_mean(u: &PeriodicField) -> Result<()> {
    let (mean, tol) = (u.mean(), mass_tol(u));
    if mean.abs() > tol {
        Err(Error::NonZeroMean { mean, tol })
    } else {
        Ok(())
    }
}

/// Uniform seeds `xi_j = j L / n_xi` with `U = u0(xi)` and `V = u0'(xi)`.
pub fn seed(u0: &PeriodicField, n_xi: usize) -> Result<CharacteristicEnsemble> {
    let length = u0.grid().length();
    let xi: Vec<f64> = (0..n_xi).map(|j| j as f64 * length / n_xi as f64).collect();
    seed_at(u0, xi)
}

/// Uniform seeds plus midpoints in the cells around `argmin u0'`.
pub fn seed_refined(
    u0: &PeriodicField,
    n_xi: usize,
    cells: usize,
) -> Result<CharacteristicEnsemble> {
    let length = u0.grid().length();
    let h = length / n_xi as f64;
    let (x_min, _) = refined_min(&spectral_derivative(u0));
    let centre = (x_min / h).round() as i64;
    let mut xi: Vec<f64> = (0..n_xi).map(|j| j as f64 * h).collect();
    let half = cells as i64 / 2;
    for c in (centre - half)..(centre + half) {
        xi.push(((c as f64 + 0.5) * h).rem_euclid(length));
    }
    xi.sort_by(f64::total_cmp);
    xi.dedup();
    seed_at(u0, xi)
}

fn seed_at(u0: &PeriodicField, xi: Vec<f64>) -> Result<CharacteristicEnsemble> {
    require_zero_mean(u0)?;
    let interp = TrigInterpolant::new(u0, 0.0);
    let (u, v): (Vec<f64>, Vec<f64>) = xi
        .iter()
        .map(|&s| {
            let (f, df, _) = interp.value_and_derivatives(s);
            (f, df)
        })
        .unzip();
    Ok(CharacteristicEnsemble {
        length: u0.grid().length(),
        t: 0.0,
        x: xi.clone(),
        log_stretch: vec![0.0; xi.len()],
        xi,
        u,
        v,
    })
}

/// Source of `u(t, .)` as DFT coefficients on a fixed grid.
pub trait FieldProvider {
    fn grid(&self) -> PeriodicGrid;
    fn coefficients_at(&self, t: f64) -> Result<Vec<Complex64>>;
}

/// Stored states with their time derivatives, interpolated by cubic
/// Hermite polynomials in time.
#[derive(Debug, Clone)]
pub struct HermiteProvider {
    grid: PeriodicGrid,
    times: Vec<f64>,
    states: Vec<Vec<Complex64>>,
    rates: Vec<Vec<Complex64>>,
}

impl HermiteProvider {
    pub fn new(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            times: Vec::new(),
            states: Vec::new(),
            rates: Vec::new(),
        }
    }

    /// Appends a frame; times must increase.
    pub fn push(&mut self, t: f64, state: Vec<Complex64>, rate: Vec<Complex64>) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.states.push(state);
        self.rates.push(rate);
    }

    /// Keeps only the newest `keep` frames.
    pub fn retain_last(&mut self, keep: usize) {
        let drop = self.times.len().saturating_sub(keep);
        self.times.drain(..drop);
        self.states.drain(..drop);
        self.rates.drain(..drop);
    }
}

impl FieldProvider for HermiteProvider {
    fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    fn coefficients_at(&self, t: f64) -> Result<Vec<Complex64>> {
        let count = self.times.len();
        if count == 0 {
            return Err(Error::ProviderGap { t });
        }
        let span = (self.times[count - 1] - self.times[0]).abs().max(1.0);
        let slack = 1e-12 * span;
        if t < self.times[0] - slack || t > self.times[count - 1] + slack {
            return Err(Error::ProviderGap { t });
        }
        if count == 1 {
            return Ok(self.states[0].clone());
        }
        let i = match self.times.iter().rposition(|&ti| ti <= t) {
            Some(i) if i + 1 < count => i,
            Some(i) => i - 1,
            None => 0,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = ((t - t0) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = (s3 - 2.0 * s2 + s) * h;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = (s3 - s2) * h;
        let (y0, y1) = (&self.states[i], &self.states[i + 1]);
        let (r0, r1) = (&self.rates[i], &self.rates[i + 1]);
        Ok((0..y0.len())
            .map(|k| y0[k] * h00 + r0[k] * h10 + y1[k] * h01 + r1[k] * h11)
            .collect())
    }
}

/// Interpolant of `d_x^{-1} u` from the coefficients of `u`.
pub fn antiderivative_interpolant(grid: &PeriodicGrid, uhat: &[Complex64]) -> TrigInterpolant {
    let symbols = grid.derivative_symbols();
    let g: Vec<Complex64> = uhat
        .iter()
        .zip(&symbols)
        .map(|(c, &k)| {
            if k == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                c / Complex64::new(0.0, k)
            }
        })
        .collect();
    TrigInterpolant::from_coefficients(&g, grid.length(), INTERP_CUTOFF)
}

/// One RK4 step of the characteristic system.
pub fn advance(
    ens: &CharacteristicEnsemble,
    provider: &dyn FieldProvider,
    dt: f64,
    gamma: f64,
) -> Result<CharacteristicEnsemble> {
    let grid = provider.grid();
    let g_at = |t: f64| -> Result<TrigInterpolant> {
        Ok(antiderivative_interpolant(
            &grid,
            &provider.coefficients_at(t)?,
        ))
    };
    let g0 = g_at(ens.t)?;
    let g_mid = g_at(ens.t + 0.5 * dt)?;
    let g1 = g_at(ens.t + dt)?;

    let rate = |g: &TrigInterpolant, x: f64, u: f64, v: f64| -> [f64; 4] {
        [u, gamma * g.value(x), -v * v + gamma * u, v]
    };
    let n = ens.len();
    let mut out = ens.clone();
    for j in 0..n {
        let y = [ens.x[j], ens.u[j], ens.v[j], ens.log_stretch[j]];
        let k1 = rate(&g0, y[0], y[1], y[2]);
        let y2: [f64; 4] = std::array::from_fn(|i| y[i] + 0.5 * dt * k1[i]);
        let k2 = rate(&g_mid, y2[0], y2[1], y2[2]);
        let y3: [f64; 4] = std::array::from_fn(|i| y[i] + 0.5 * dt * k2[i]);
        let k3 = rate(&g_mid, y3[0], y3[1], y3[2]);
        let y4: [f64; 4] = std::array::from_fn(|i| y[i] + dt * k3[i]);
        let k4 = rate(&g1, y4[0], y4[1], y4[2]);
        let next: [f64; 4] =
            std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]));
        out.x[j] = next[0].rem_euclid(ens.length);
        out.u[j] = next[1];
        out.v[j] = next[2];
        out.log_stretch[j] = next[3];
    }
    out.t = ens.t + dt;
    Ok(out)
}

/// True when the positions, read cyclically, increase in `xi` and wind
/// around the circle exactly once.
pub fn diffeomorphism_check(ens: &CharacteristicEnsemble) -> bool {
    let n = ens.len();
    if n < 2 {
        return true;
    }
    let l = ens.length;
    let mut total = 0.0;
    for j in 0..n {
        let d = (ens.x[(j + 1) % n] - ens.x[j]).rem_euclid(l);
        if !(d > 0.0) {
            return false;
        }
        total += d;
    }
    (total - l).abs() <= 1e-9 * l
}

/// `(t, (T - t) min u_x, (T - t) max u_x)` over the fit window, with `T` the
/// zero of the fitted line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSample {
    pub t: f64,
    pub p_min: f64,
    pub p_max: f64,
}

pub fn rate_products(record: &SimulationRecord, est: &BlowupEstimate) -> Result<Vec<RateSample>> {
    if est.end >= record.len() || est.start > est.end || est.samples() < MIN_WINDOW {
        let found = if est.end < record.len() {
            est.samples()
        } else {
            0
        };
        return Err(Error::InsufficientWindow {
            found,
            needed: MIN_WINDOW,
        });
    }
    Ok((est.start..=est.end)
        .map(|i| {
            let t = record.times[i];
            RateSample {
                t,
                p_min: (est.t_zero() - t) * record.min_ux[i],
                p_max: (est.t_zero() - t) * record.max_ux[i],
            }
        })
        .collect())
}

pub const RATES_HEADER: &str = "t,p_min,p_max";
pub const ENSEMBLE_HEADER: &str = "t,xi,X,U,V";

pub fn rates_csv(rates: &[RateSample]) -> String {
    let mut out = format!("{RATES_HEADER}\n");
    for r in rates {
        writeln!(out, "{},{},{}", r.t, r.p_min, r.p_max).unwrap();
    }
    out
}

/// Long-format table of ensemble snapshots.
pub fn ensemble_csv(snapshots: &[CharacteristicEnsemble]) -> String {
    let mut out = format!("{ENSEMBLE_HEADER}\n");
    for e in snapshots {
        for j in 0..e.len() {
            writeln!(out, "{},{},{},{},{}", e.t, e.xi[j], e.x[j], e.u[j], e.v[j]).unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackConfig {
    pub simulation: SimulationConfig,
    pub n_xi: usize,
    /// Extra seeds around `argmin u0'`; zero keeps the seeds uniform.
    pub refine_cells: usize,
    /// Checks are evaluated every this many steps.
    pub sample_every: usize,
    /// Ensemble snapshots are kept every this many samples.
    pub snapshot_every: usize,
}

impl TrackConfig {
    pub fn new(simulation: SimulationConfig) -> Self {
        Self {
            simulation,
            n_xi: 256,
            refine_cells: 0,
            sample_every: 10,
            snapshot_every: 10,
        }
    }
}

/// Cross-checks between the characteristics and the spectral field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackSample {
    pub t: f64,
    /// `max |U - u(t, X)|`
    pub consistency: f64,
    pub min_v: f64,
    pub grid_min_ux: f64,
    pub diffeomorphic: bool,
    /// `max |G(t, X)|`
    pub max_abs_g: f64,
    /// `max |d_xi X / exp(int V) - 1|`
    pub stretch_error: f64,
    /// Largest excess of the difference quotient of `V` over
    /// `-V^2 + gamma (||u0||_inf + gamma t ||u0||_2)` in the last step.
    pub riccati_excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackRun {
    pub samples: Vec<TrackSample>,
    pub snapshots: Vec<CharacteristicEnsemble>,
    pub final_ensemble: CharacteristicEnsemble,
    pub blowup: bool,
    pub sup0: f64,
    pub l2_0: f64,
}

/// Co-steps the PDE and the characteristics up to `t_max` or slope blow-up.
pub fn track(config: &TrackConfig) -> Result<TrackRun> {
    let sim = &config.simulation;
    sim.validate()?;
    if config.sample_every == 0 || config.snapshot_every == 0 || config.n_xi < 2 {
        return Err(Error::InvalidConfig(
            "sampling intervals and n_xi must be positive".into(),
        ));
    }
    let gamma = sim.gamma;
    let grid = PeriodicGrid::unit(sim.n)?;
    let u0 = sim.initial.sample(grid)?;
    let scalars = crate::criteria::InitialData::sampled(&u0);
    let (sup0, l2_0) = (scalars.sup_abs, scalars.l2);
    let mut ens = if config.refine_cells > 0 {
        seed_refined(&u0, config.n_xi, config.refine_cells)?
    } else {
        seed(&u0, config.n_xi)?
    };
    let mut solver = Solver::new(
        grid,
        Model {
            gamma,
            dealias: sim.dealias,
            nonlinear: sim.nonlinear,
        },
    );
    let mut uhat = u0.coefficients().to_vec();
    solver.project(&mut uhat);
    let n = grid.n();
    let mut rate = vec![Complex64::new(0.0, 0.0); n];
    solver.rhs_into(&uhat, &mut rate);

    let d0 = solver.diagnostics(&uhat);
    let mut provider = HermiteProvider::new(grid);
    provider.push(0.0, uhat.clone(), rate.clone());

    let mut samples = Vec::new();
    let mut snapshots = vec![ens.clone()];
    let steps = (sim.t_max / sim.dt).round() as u64;
    let mut excess = f64::NEG_INFINITY;
    let mut blowup = false;
    for step in 1..=steps {
        let t_old = ens.t;
        let t = step as f64 * sim.dt;
        let dt = t - t_old;
        solver.step_in_place(&mut uhat, dt)?;
        solver.rhs_into(&uhat, &mut rate);
        provider.push(t, uhat.clone(), rate.clone());
        provider.retain_last(2);
        let next = advance(&ens, &provider, dt, gamma)?;
        let bound = gamma * (sup0 + gamma * t * l2_0);
        for j in 0..ens.len() {
            let (v0, v1) = (ens.v[j], next.v[j]);
            let floor = if v0.signum() != v1.signum() {
                0.0
            } else {
                (v0 * v0).min(v1 * v1)
            };
            excess = excess.max((v1 - v0) / dt - (-floor + bound));
        }
        ens = next;
        ens.t = t;

        let d = solver.diagnostics(&uhat);
        blowup = d.min_ux <= sim.stop_slope || sim.front_unresolved(&d, &d0);
        if step % config.sample_every as u64 == 0 || step == steps || blowup {
            let field = PeriodicField::from_coefficients(grid, uhat.clone())?;
            let u_interp = TrigInterpolant::new(&field, INTERP_CUTOFF);
            let g_interp = TrigInterpolant::new(&antiderivative_zero_mean(&field)?, INTERP_CUTOFF);
            let consistency = (0..ens.len())
                .map(|j| (ens.u[j] - u_interp.value(ens.x[j])).abs())
                .fold(0.0, f64::max);
            let max_abs_g = ens
                .x
                .iter()
                .map(|&x| g_interp.value(x).abs())
                .fold(0.0, f64::max);
            let stretch_error = ens
                .stretch_from_positions()
                .iter()
                .zip(&ens.log_stretch)
                .map(|(s, w)| (s / w.exp() - 1.0).abs())
                .fold(0.0, f64::max);
            samples.push(TrackSample {
                t,
                consistency,
                min_v: ens.min_v(),
                grid_min_ux: d.min_ux,
                diffeomorphic: diffeomorphism_check(&ens),
                max_abs_g,
                stretch_error,
                riccati_excess: excess,
            });
            excess = f64::NEG_INFINITY;
            if samples.len() % config.snapshot_every == 0 {
                snapshots.push(ens.clone());
            }
        }
        if blowup {
            break;
        }
    }
    Ok(TrackRun {
        samples,
        snapshots,
        final_ensemble: ens,
        blowup,
        sup0,
        l2_0,
    })
}
