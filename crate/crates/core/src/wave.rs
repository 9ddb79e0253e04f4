//! Periodic traveling waves `u = phi(x - c t)` of period `2 pi`, solving
//! `(c - phi) phi'' = (phi')^2 - gamma phi`.
//!
//! Profiles are sampled at `x_j = -pi + 2 pi j / n`, so the crest sits at
//! `x = -pi` (equivalently `+pi`).

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{spectral_derivative, PeriodicField, PeriodicGrid};

/// Largest admissible speed ratio `c / gamma`.
pub const MAX_SPEED_RATIO: f64 = PI * PI / 9.0;
/// Corner-wave amplitude: `phi = CORNER_KAPPA gamma (3 x^2 - pi^2)`.
pub const CORNER_KAPPA: f64 = 1.0 / 18.0;

pub const PROFILE_HEADER: &str = "x,phi";
pub const BRANCH_HEADER: &str = "c_over_gamma,amplitude,residual";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileKind {
    /// Resolved by its Fourier series.
    Smooth,
    /// Slope discontinuity at the crest.
    Corner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub phi: Vec<f64>,
    pub c: f64,
    pub gamma: f64,
    pub kind: ProfileKind,
    /// Newton iterations spent on the final speed, if solved.
    pub iterations: usize,
}

impl WaveProfile {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn abscissa(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * j as f64 / self.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.phi.iter().sum::<f64>() / self.len() as f64
    }

    pub fn amplitude(&self) -> f64 {
        let max = self.phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.phi.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    pub fn max_abs(&self) -> f64 {
        self.phi.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coefficient of `cos(k y)` with `y = x + pi` measured from the crest.
    pub fn cosine_coefficient(&self, k: usize) -> f64 {
        let n = self.len();
        let scale = if k == 0 || 2 * k == n { 1.0 } else { 2.0 } / n as f64;
        scale
            * (0..n)
                .map(|j| self.phi[j] * (k as f64 * 2.0 * PI * j as f64 / n as f64).cos())
                .sum::<f64>()
    }

    /// Largest deviation from `phi(-x) = phi(x)`.
    pub fn evenness_error(&self) -> f64 {
        let n = self.len();
        (1..n)
            .map(|j| (self.phi[j] - self.phi[n - j]).abs())
            .fold(0.0, f64::max)
    }
}

/// Max-norm of `(c - phi) phi'' - (phi')^2 + gamma phi`.
///
/// Smooth profiles are differentiated spectrally at every node. Corner
/// profiles use fourth-order differences and skip the nodes within four
/// cells of the crest.
pub fn ode_residual(w: &WaveProfile) -> Result<f64> {
    let n = w.len();
    let (d1, d2, skip) = match w.kind {
        ProfileKind::Smooth => {
            let grid = PeriodicGrid::new(n, 2.0 * PI)?;
            let f = PeriodicField::from_values(grid, w.phi.clone())?;
            let d1 = spectral_derivative(&f);
            let d2 = spectral_derivative(&d1);
            (d1.into_values(), d2.into_values(), 0)
        }
        ProfileKind::Corner => {
            if n < 16 {
                return Err(Error::InvalidGrid(format!(
                    "corner residual needs n >= 16, got {n}"
                )));
            }
            let h = 2.0 * PI / n as f64;
            let p = |j: isize| w.phi[j.rem_euclid(n as isize) as usize];
            let (mut d1, mut d2) = (vec![0.0; n], vec![0.0; n]);
            for j in 0..n as isize {
                d1[j as usize] =
                    (p(j - 2) - 8.0 * p(j - 1) + 8.0 * p(j + 1) - p(j + 2)) / (12.0 * h);
                d2[j as usize] = (-p(j - 2) + 16.0 * p(j - 1) - 30.0 * p(j) + 16.0 * p(j + 1)
                    - p(j + 2))
                    / (12.0 * h * h);
            }
            (d1, d2, 4)
        }
    };
    Ok((0..n)
        .filter(|&j| j.min(n - j) > skip || skip == 0)
        .map(|j| ((w.c - w.phi[j]) * d2[j] - d1[j] * d1[j] + w.gamma * w.phi[j]).abs())
        .fold(0.0, f64::max))
}

/// `CORNER_KAPPA gamma (3 x^2 - pi^2)` at `c = pi^2 gamma / 9`.
pub fn corner_wave(gamma: f64, n: usize) -> Result<WaveProfile> {
    if !(gamma > 0.0) {
        return Err(Error::NegativeParameter {
            name: "gamma",
            value: gamma,
        });
    }
    PeriodicGrid::new(n, 2.0 * PI)?;
    let phi = (0..n)
        .map(|j| {
            let x = -PI + 2.0 * PI * j as f64 / n as f64;
            CORNER_KAPPA * gamma * (3.0 * x * x - PI * PI)
        })
        .collect();
    Ok(WaveProfile {
        phi,
        c: MAX_SPEED_RATIO * gamma,
        gamma,
        kind: ProfileKind::Corner,
        iterations: 0,
    })
}

/// Weakly nonlinear amplitude: `c = gamma + delta^2 / (6 gamma)`.
pub fn stokes_amplitude(c: f64, gamma: f64) -> f64 {
    (6.0 * gamma * (c - gamma)).max(0.0).sqrt()
}

/// Two-term expansion `delta cos y + delta^2 / (3 gamma) cos 2y`.
pub fn stokes_profile(c: f64, gamma: f64, n: usize) -> WaveProfile {
    let delta = stokes_amplitude(c, gamma);
    let phi = (0..n)
        .map(|j| {
            let y = 2.0 * PI * j as f64 / n as f64;
            delta * y.cos() + delta * delta / (3.0 * gamma) * (2.0 * y).cos()
        })
        .collect();
    WaveProfile {
        phi,
        c,
        gamma,
        kind: ProfileKind::Smooth,
        iterations: 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSolverOptions {
    pub n: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Largest increment of `c / gamma` between continuation stages.
    pub continuation_step: f64,
    /// Starting speed offset `c / gamma - 1` of the continuation.
    pub start_offset: f64,
    pub max_n: usize,
}

impl Default for WaveSolverOptions {
    fn default() -> Self {
        Self {
            n: 128,
            max_iter: 50,
            tol: 1e-10,
            continuation_step: 0.005,
            start_offset: 0.002,
            max_n: 1024,
        }
    }
}

/// Even cosine series `sum b_k cos(k y)`, `k = 1..n/2-1`, collocated at
/// `y_j = 2 pi j / n`.
struct CosineBasis {
    n: usize,
    /// `cos(k y_j)` and `sin(k y_j)`, one row per mode.
    cos: DMatrix<f64>,
    sin: DMatrix<f64>,
    k: DVector<f64>,
}

impl CosineBasis {
    fn new(n: usize) -> Self {
        let modes = n / 2 - 1;
        let angle = |r: usize, j: usize| (r + 1) as f64 * 2.0 * PI * j as f64 / n as f64;
        Self {
            n,
            cos: DMatrix::from_fn(modes, n, |r, j| angle(r, j).cos()),
            sin: DMatrix::from_fn(modes, n, |r, j| angle(r, j).sin()),
            k: DVector::from_fn(modes, |r, _| (r + 1) as f64),
        }
    }

    fn modes(&self) -> usize {
        self.k.len()
    }

    /// `(phi, phi', phi'')` on the grid.
    fn evaluate(&self, b: &DVector<f64>) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let kb = b.component_mul(&self.k);
        let kkb = kb.component_mul(&self.k);
        (
            self.cos.tr_mul(b),
            -self.sin.tr_mul(&kb),
            -self.cos.tr_mul(&kkb),
        )
    }

    fn project(&self, r: &DVector<f64>) -> DVector<f64> {
        (&self.cos * r) * (2.0 / self.n as f64)
    }

    fn coefficients(&self, phi: &[f64]) -> DVector<f64> {
        self.project(&DVector::from_column_slice(phi))
    }

    /// Coefficients padded with zeros to `modes` entries.
    fn refine(b: &DVector<f64>, modes: usize) -> DVector<f64> {
        let mut out = DVector::zeros(modes);
        out.rows_mut(0, b.len()).copy_from(b);
        out
    }
}

struct Newton<'a> {
    basis: &'a CosineBasis,
    c: f64,
    gamma: f64,
}

enum Outcome {
    Converged(DVector<f64>, usize),
    /// The collocation system is solved but the nodal residual stays above
    /// tolerance: the grid is too coarse for this profile.
    Unresolved(DVector<f64>),
}

impl Newton<'_> {
    fn residual(&self, b: &DVector<f64>) -> DVector<f64> {
        let (f, d1, d2) = self.basis.evaluate(b);
        DVector::from_fn(self.basis.n, |j, _| {
            (self.c - f[j]) * d2[j] - d1[j] * d1[j] + self.gamma * f[j]
        })
    }

    /// Projection of `(c - phi) d'' - phi'' d - 2 phi' d' + gamma d` for
    /// every basis function `d`.
    fn jacobian(&self, b: &DVector<f64>) -> DMatrix<f64> {
        let (f, d1, d2) = self.basis.evaluate(b);
        let cos = &self.basis.cos;
        let k = &self.basis.k;
        let n = self.basis.n;
        let weighted = |w: &dyn Fn(usize) -> f64, m: &DMatrix<f64>| {
            let mut out = m.clone();
            for j in 0..n {
                out.column_mut(j).scale_mut(w(j));
            }
            out
        };
        let stiff = cos * weighted(&|j| self.c - f[j], cos).transpose();
        let mass = cos * weighted(&|j| self.gamma - d2[j], cos).transpose();
        let drift = cos * weighted(&|j| 2.0 * d1[j], &self.basis.sin).transpose();
        let mut jac = mass;
        for q in 0..self.basis.modes() {
            let kq = k[q];
            for p in 0..self.basis.modes() {
                jac[(p, q)] += -kq * kq * stiff[(p, q)] + kq * drift[(p, q)];
            }
        }
        jac * (2.0 / n as f64)
    }

    fn solve(&self, mut b: DVector<f64>, max_iter: usize, tol: f64) -> Result<Outcome> {
        let mut r = self.residual(&b);
        let mut norm = r.amax();
        for iter in 0..max_iter {
            if norm < tol {
                return Ok(Outcome::Converged(b, iter));
            }
            let rhs = self.basis.project(&r);
            if rhs.amax() < 1e-3 * tol {
                return Ok(Outcome::Unresolved(b));
            }
            let delta = self.jacobian(&b).lu().solve(&rhs).ok_or_else(|| {
                Error::NoConvergence(format!("singular Jacobian at c = {}", self.c))
            })?;
            let mut lambda = 1.0;
            loop {
                let trial = &b - &delta * lambda;
                let tr = self.residual(&trial);
                let tn = tr.amax();
                if tn.is_finite() && tn < norm {
                    b = trial;
                    r = tr;
                    norm = tn;
                    break;
                }
                lambda *= 0.5;
                if lambda < 1e-6 {
                    if self.basis.project(&r).amax() < 1e-3 * tol {
                        return Ok(Outcome::Unresolved(b));
                    }
                    return Err(Error::NoConvergence(format!(
                        "step halving exhausted at c = {}, residual {norm:e}",
                        self.c
                    )));
                }
            }
        }
        if norm < tol {
            Ok(Outcome::Converged(b, max_iter))
        } else {
            Err(Error::NoConvergence(format!(
                "{max_iter} iterations at c = {}, residual {norm:e}",
                self.c
            )))
        }
    }
}

fn check_speed(c: f64, gamma: f64) -> Result<()> {
    if !(gamma > 0.0) {
        return Err(Error::NegativeParameter {
            name: "gamma",
            value: gamma,
        });
    }
    let ratio = c / gamma;
    if !(ratio > 1.0 && ratio < MAX_SPEED_RATIO) {
        return Err(Error::SpeedOutOfRange(ratio));
    }
    Ok(())
}

fn profile_from(
    basis: &CosineBasis,
    b: &DVector<f64>,
    c: f64,
    gamma: f64,
    iterations: usize,
) -> WaveProfile {
    WaveProfile {
        phi: basis.evaluate(b).0.as_slice().to_vec(),
        c,
        gamma,
        kind: ProfileKind::Smooth,
        iterations,
    }
}

/// Newton at one speed, doubling the grid while the profile is unresolved.
fn solve_resolved(
    basis: &mut CosineBasis,
    c: f64,
    gamma: f64,
    mut guess: DVector<f64>,
    options: &WaveSolverOptions,
) -> Result<(DVector<f64>, usize)> {
    loop {
        let newton = Newton { basis, c, gamma };
        match newton.solve(guess, options.max_iter, options.tol)? {
            Outcome::Converged(b, iters) => return Ok((b, iters)),
            Outcome::Unresolved(b) => {
                let n = 2 * basis.n;
                if n > options.max_n {
                    return Err(Error::NoConvergence(format!(
                        "profile at c = {c} unresolved on {} points",
                        basis.n
                    )));
                }
                *basis = CosineBasis::new(n);
                guess = CosineBasis::refine(&b, basis.modes());
            }
        }
    }
}

/// Smooth even wave at speed `c`, reached by continuation in `c` from the
/// small-amplitude sinusoid, or by Newton directly from `init`. The grid
/// starts at `options.n` points and is doubled up to `options.max_n` when
/// the profile is not resolved.
pub fn solve_periodic_wave(
    c: f64,
    gamma: f64,
    init: Option<&WaveProfile>,
    options: &WaveSolverOptions,
) -> Result<WaveProfile> {
    check_speed(c, gamma)?;
    PeriodicGrid::new(options.n, 2.0 * PI)?;
    let mut basis = CosineBasis::new(options.n);
    if let Some(start) = init {
        let seed = if start.len() >= options.n {
            start.clone()
        } else {
            resample_profile(start, options.n)?
        };
        basis = CosineBasis::new(seed.len());
        let guess = basis.coefficients(&seed.phi);
        let (b, iters) = solve_resolved(&mut basis, c, gamma, guess, options)?;
        return Ok(profile_from(&basis, &b, c, gamma, iters));
    }
    let stages = continuation_speeds(c / gamma, options);
    let mut b = DVector::zeros(0);
    let mut previous: Option<DVector<f64>> = None;
    let mut iters = 0;
    for (i, &ratio) in stages.iter().enumerate() {
        let guess = match &previous {
            // Secant extrapolation along the branch.
            Some(p) => {
                let w = (ratio - stages[i - 1]) / (stages[i - 1] - stages[i - 2]);
                let p = if p.len() < b.len() {
                    CosineBasis::refine(p, b.len())
                } else {
                    p.clone()
                };
                &b + (&b - p) * w
            }
            None => basis.coefficients(&stokes_profile(ratio * gamma, gamma, basis.n).phi),
        };
        let (next, k) = solve_resolved(&mut basis, ratio * gamma, gamma, guess, options)?;
        if i > 0 {
            previous = Some(std::mem::replace(&mut b, next));
        } else {
            b = next;
        }
        iters = k;
    }
    Ok(profile_from(&basis, &b, c, gamma, iters))
}

fn continuation_speeds(target: f64, options: &WaveSolverOptions) -> Vec<f64> {
    let start = (1.0 + options.start_offset).min(target);
    let count = ((target - start) / options.continuation_step)
        .ceil()
        .max(0.0) as usize;
    let mut out: Vec<f64> = (0..count)
        .map(|i| start + (target - start) * i as f64 / count as f64)
        .collect();
    out.push(target);
    out
}

fn resample_profile(w: &WaveProfile, n: usize) -> Result<WaveProfile> {
    let grid = PeriodicGrid::new(w.len(), 2.0 * PI)?;
    let field = PeriodicField::from_values(grid, w.phi.clone())?;
    let phi = (0..n)
        .map(|j| field.interpolate(2.0 * PI * j as f64 / n as f64))
        .collect();
    Ok(WaveProfile { phi, ..w.clone() })
}

/// Speed-amplitude diagram; each point continues from the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub c_over_gamma: f64,
    pub amplitude: f64,
    pub residual: f64,
}

pub fn wave_branch(
    gamma: f64,
    ratios: &[f64],
    options: &WaveSolverOptions,
) -> Result<Vec<BranchPoint>> {
    let mut out = Vec::with_capacity(ratios.len());
    let mut previous: Option<WaveProfile> = None;
    for &ratio in ratios {
        let w = match &previous {
            Some(p) if ratio > p.c / gamma && ratio - p.c / gamma <= options.continuation_step => {
                solve_periodic_wave(ratio * gamma, gamma, Some(p), options)?
            }
            _ => solve_periodic_wave(ratio * gamma, gamma, None, options)?,
        };
        out.push(BranchPoint {
            c_over_gamma: ratio,
            amplitude: w.amplitude(),
            residual: ode_residual(&w)?,
        });
        previous = Some(w);
    }
    Ok(out)
}

pub fn profile_csv(w: &WaveProfile) -> String {
    let mut out = format!("{PROFILE_HEADER}\n");
    for (j, v) in w.phi.iter().enumerate() {
        writeln!(out, "{},{}", w.abscissa(j), v).unwrap();
    }
    out
}

pub fn branch_csv(points: &[BranchPoint]) -> String {
    let mut out = format!("{BRANCH_HEADER}\n");
    for p in points {
        writeln!(out, "{},{},{}", p.c_over_gamma, p.amplitude, p.residual).unwrap();
    }
    out
}
