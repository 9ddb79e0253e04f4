//! Spectral representation of real periodic fields.
//!
//! Coefficients follow the unnormalized DFT convention
//! `c_k = sum_j u_j exp(-2 pi i j k / n)`, so the mean of the samples is
//! `c_0 / n`. Mode indices above `n / 2` are negative wavenumbers.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Forward and inverse FFT plans of one size.
pub struct Plan {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

/// Shared plan for transforms of length `n`.
pub fn plan(n: usize) -> Arc<Plan> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Signed mode number of DFT index `idx` on an `n`-point grid.
#[inline]
pub fn signed_mode(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Uniform grid on a circle of the given length, right endpoint excluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    n: usize,
    length: f64,
}

impl PeriodicGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length = {length} must be positive"
            )));
        }
        Ok(Self { n, length })
    }

    /// Grid on the unit circle.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn abscissa(&self, j: usize) -> f64 {
        j as f64 * self.length / self.n as f64
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.abscissa(j)).collect()
    }

    /// Angular wavenumber `2 pi k / length` for DFT index `idx`.
    pub fn wavenumber(&self, idx: usize) -> f64 {
        2.0 * PI * signed_mode(idx, self.n) as f64 / self.length
    }

    /// Derivative multipliers with the Nyquist mode zeroed.
    pub fn derivative_symbols(&self) -> Vec<f64> {
        (0..self.n)
            .map(|idx| {
                if idx == self.n / 2 {
                    0.0
                } else {
                    self.wavenumber(idx)
                }
            })
            .collect()
    }
}

/// Real samples on a periodic grid together with their DFT coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    grid: PeriodicGrid,
    values: Vec<f64>,
    coefficients: Vec<Complex64>,
}

impl PeriodicField {
    pub fn from_values(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "{} samples supplied for a grid of {}",
                values.len(),
                grid.n()
            )));
        }
        let mut coefficients: Vec<Complex64> =
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        plan(grid.n()).forward.process(&mut coefficients);
        Ok(Self {
            grid,
            values,
            coefficients,
        })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.abscissae().into_iter().map(f).collect();
        Self::from_values(grid, values).expect("sample count matches grid")
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
            coefficients: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Builds the field from coefficients; the real part of the inverse
    /// transform is kept.
    pub fn from_coefficients(grid: PeriodicGrid, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "{} coefficients supplied for a grid of {}",
                coefficients.len(),
                grid.n()
            )));
        }
        let mut work = coefficients.clone();
        plan(grid.n()).inverse.process(&mut work);
        let scale = 1.0 / grid.n() as f64;
        let values = work.iter().map(|z| z.re * scale).collect();
        Ok(Self {
            grid,
            values,
            coefficients,
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.coefficients[0].re / self.grid.n() as f64
    }

    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.grid.n() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Exact periodic quadrature of the trigonometric interpolant.
    pub fn integral(&self) -> f64 {
        self.mean() * self.grid.length()
    }

    /// Copy with the mean removed.
    pub fn project_zero_mean(&self) -> Self {
        let mean = self.mean();
        let values = self.values.iter().map(|v| v - mean).collect();
        let mut coefficients = self.coefficients.clone();
        coefficients[0] = Complex64::new(0.0, 0.0);
        Self {
            grid: self.grid,
            values,
            coefficients,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }

    /// Trigonometric interpolant at an arbitrary abscissa.
    pub fn interpolate(&self, x: f64) -> f64 {
        TrigInterpolant::new(self, 0.0).value(x)
    }

    /// Resamples onto a grid of another size by zero-padding or truncating
    /// the spectrum.
    pub fn resample(&self, grid: PeriodicGrid) -> Result<Self> {
        if (grid.length() - self.grid.length()).abs() > 1e-14 * self.grid.length() {
            return Err(Error::InvalidGrid(
                "resampling requires equal lengths".into(),
            ));
        }
        let (n_old, n_new) = (self.grid.n(), grid.n());
        let half = n_old.min(n_new) / 2;
        let scale = n_new as f64 / n_old as f64;
        let mut coefficients = vec![Complex64::new(0.0, 0.0); n_new];
        for k in 0..half {
            coefficients[k] = self.coefficients[k] * scale;
            if k > 0 {
                coefficients[n_new - k] = self.coefficients[n_old - k] * scale;
            }
        }
        Self::from_coefficients(grid, coefficients)
    }
}

/// Zero-mass tolerance: `1e-10 * (length * rms(f) + 1)`.
pub fn mass_tol(f: &PeriodicField) -> f64 {
    1e-10 * (f.grid().length() * f.rms() + 1.0)
}

fn require_zero_mean(f: &PeriodicField) -> Result<()> {
    let mean = f.mean();
    let tol = mass_tol(f);
    if mean.abs() > tol {
        Err(Error::NonZeroMean { mean, tol })
    } else {
        Ok(())
    }
}

pub fn spectral_derivative(f: &PeriodicField) -> PeriodicField {
    let grid = *f.grid();
    let symbols = grid.derivative_symbols();
    let coefficients = f
        .coefficients()
        .iter()
        .zip(&symbols)
        .map(|(c, &k)| c * Complex64::new(0.0, k))
        .collect();
    PeriodicField::from_coefficients(grid, coefficients).expect("grid size preserved")
}

/// Mean-zero periodic primitive. Fails when `f` carries mass.
pub fn antiderivative_zero_mean(f: &PeriodicField) -> Result<PeriodicField> {
    require_zero_mean(f)?;
    let grid = *f.grid();
    let symbols = grid.derivative_symbols();
    let coefficients = f
        .coefficients()
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
    PeriodicField::from_coefficients(grid, coefficients)
}

/// Mass, `Q = int u^2` and `E = int [gamma (d^-1 u)^2 + u^3 / 3]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConservedSet {
    pub mass: f64,
    pub q: f64,
    pub e: f64,
    pub gamma: f64,
}

pub fn conserved_quantities(f: &PeriodicField, gamma: f64) -> Result<ConservedSet> {
    let g = antiderivative_zero_mean(f)?;
    let dx = f.grid().dx();
    let q = f.values().iter().map(|u| u * u).sum::<f64>() * dx;
    let e = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(u, g)| gamma * g * g + u * u * u / 3.0)
        .sum::<f64>()
        * dx;
    Ok(ConservedSet {
        mass: f.integral(),
        q,
        e,
        gamma,
    })
}

/// Fast evaluation of a field's trigonometric interpolant at off-grid
/// points, keeping only the modes above a relative cutoff.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    length: f64,
    mean: f64,
    /// `2 c_k / n` for k = 1..=kmax.
    modes: Vec<Complex64>,
    nyquist: f64,
    nyquist_mode: f64,
}

impl TrigInterpolant {
    pub fn new(f: &PeriodicField, cutoff: f64) -> Self {
        Self::from_coefficients(f.coefficients(), f.grid().length(), cutoff)
    }

    pub fn from_coefficients(coefficients: &[Complex64], length: f64, cutoff: f64) -> Self {
        let n = coefficients.len();
        let peak = coefficients.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let threshold = cutoff * peak;
        let mut kmax = 0;
        for k in 1..n / 2 {
            if coefficients[k].norm() > threshold || coefficients[n - k].norm() > threshold {
                kmax = k;
            }
        }
        let scale = 1.0 / n as f64;
        let modes = (1..=kmax)
            .map(|k| (coefficients[k] + coefficients[n - k].conj()) * scale)
            .collect();
        let nyquist_raw = coefficients[n / 2].re * scale;
        let nyquist = if coefficients[n / 2].norm() > threshold {
            nyquist_raw
        } else {
            0.0
        };
        Self {
            length,
            mean: coefficients[0].re * scale,
            modes,
            nyquist,
            nyquist_mode: (n / 2) as f64,
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.modes.len()
    }

    pub fn value(&self, x: f64) -> f64 {
        self.value_and_derivatives(x).0
    }

    /// `(f, f', f'')` at `x`.
    pub fn value_and_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let base = 2.0 * PI / self.length;
        let theta = base * x;
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::new(1.0, 0.0);
        let (mut f, mut df, mut d2f) = (self.mean, 0.0, 0.0);
        for (i, c) in self.modes.iter().enumerate() {
            rot *= step;
            // Re-normalize occasionally so long recurrences stay on the unit circle.
            if i % 64 == 63 {
                rot /= rot.norm();
            }
            let k = (i + 1) as f64 * base;
            let z = c * rot;
            f += z.re;
            df -= k * z.im;
            d2f -= k * k * z.re;
        }
        if self.nyquist != 0.0 {
            // Cosine Nyquist term; its derivative is not representable and is dropped.
            f += self.nyquist * (self.nyquist_mode * theta).cos();
        }
        (f, df, d2f)
    }
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= f64::EPSILON * (1.0 + lo.abs()) {
            break;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Infimum of the trigonometric interpolant: every grid-local minimum is
/// refined by golden-section search on the neighbouring cells.
pub fn refined_min(f: &PeriodicField) -> (f64, f64) {
    let interp = TrigInterpolant::new(f, 0.0);
    let v = f.values();
    let n = v.len();
    let h = f.grid().dx();
    let grid_min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let grid_max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (grid_max - grid_min).max(f64::MIN_POSITIVE);
    let mut best = (0.0, f64::INFINITY);
    if interp.bandwidth() == 0 {
        return (0.0, interp.value(0.0));
    }
    for j in 0..n {
        let (l, r) = (v[(j + n - 1) % n], v[(j + 1) % n]);
        if v[j] <= l && v[j] <= r && v[j] <= grid_min + 0.25 * spread {
            let x = f.grid().abscissa(j);
            let cand = golden_min(|s| interp.value(s), x - h, x + h, 200);
            if cand.1 < best.1 {
                best = cand;
            }
        }
    }
    (best.0.rem_euclid(f.grid().length()), best.1)
}

/// Supremum of the trigonometric interpolant.
pub fn refined_max(f: &PeriodicField) -> (f64, f64) {
    let (x, v) = refined_min(&f.scaled(-1.0));
    (x, -v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(n: usize) -> PeriodicGrid {
        PeriodicGrid::unit(n).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(PeriodicGrid::unit(4).is_err());
        assert!(PeriodicGrid::unit(12).is_err());
        assert!(PeriodicGrid::new(16, 0.0).is_err());
        let g = unit(16);
        assert_eq!(g.abscissa(0), 0.0);
        assert!((g.abscissae()[15] - 15.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_cosine() {
        let g = unit(64);
        let f = PeriodicField::from_fn(g, |x| (2.0 * PI * x).cos());
        let d = spectral_derivative(&f);
        let expect: Vec<f64> = g
            .abscissae()
            .iter()
            .map(|x| -2.0 * PI * (2.0 * PI * x).sin())
            .collect();
        assert!(max_diff(d.values(), &expect) < 1e-12);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let f = PeriodicField::from_fn(unit(32), |_| 3.5);
        assert!(spectral_derivative(&f).max_abs() < 1e-13);
    }

    #[test]
    fn min_slope_of_single_cosine() {
        let a = 0.05;
        let f = PeriodicField::from_fn(unit(4096), |x| a * (2.0 * PI * x).cos());
        let (_, m) = refined_min(&spectral_derivative(&f));
        assert!((m + 2.0 * PI * a).abs() < 1e-11);
    }

    #[test]
    fn antiderivative_examples() {
        let g = unit(64);
        let c = PeriodicField::from_fn(g, |x| (2.0 * PI * x).cos());
        let ac = antiderivative_zero_mean(&c).unwrap();
        let expect: Vec<f64> = g
            .abscissae()
            .iter()
            .map(|x| (2.0 * PI * x).sin() / (2.0 * PI))
            .collect();
        assert!(max_diff(ac.values(), &expect) < 1e-14);
        assert_eq!(ac.coefficients()[0], Complex64::new(0.0, 0.0));

        let s = PeriodicField::from_fn(g, |x| (4.0 * PI * x).sin());
        let as_ = antiderivative_zero_mean(&s).unwrap();
        let expect: Vec<f64> = g
            .abscissae()
            .iter()
            .map(|x| -(4.0 * PI * x).cos() / (4.0 * PI))
            .collect();
        assert!(max_diff(as_.values(), &expect) < 1e-14);
    }

    #[test]
    fn antiderivative_rejects_mass() {
        let f = PeriodicField::from_fn(unit(16), |_| 1.0);
        assert!(matches!(
            antiderivative_zero_mean(&f),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn conserved_quantities_examples() {
        let g = unit(256);
        let z = conserved_quantities(&PeriodicField::zeros(g), 1.0).unwrap();
        assert_eq!((z.mass, z.q, z.e), (0.0, 0.0, 0.0));

        let (a, b) = (0.3, 0.7);
        let f = PeriodicField::from_fn(g, |x| a * (2.0 * PI * x).cos() + b * (4.0 * PI * x).sin());
        let cs = conserved_quantities(&f, 1.0).unwrap();
        assert!((cs.q - 0.5 * (a * a + b * b)).abs() < 1e-14);
        assert!(cs.mass.abs() < 1e-15);
    }

    #[test]
    fn energy_of_cosine_against_quadrature_oracle() {
        // Composite Simpson on the closed-form primitive sin(2 pi x) / (2 pi).
        let m = 20_000;
        let h = 1.0 / m as f64;
        let integrand = |x: f64| {
            let g = (2.0 * PI * x).sin() / (2.0 * PI);
            let u = (2.0 * PI * x).cos();
            g * g + u * u * u / 3.0
        };
        let mut simpson = integrand(0.0) + integrand(1.0);
        for i in 1..m {
            simpson += integrand(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        simpson *= h / 3.0;
        let expected = 1.0 / (8.0 * PI * PI);
        assert!((simpson - expected).abs() < 1e-12);

        let f = PeriodicField::from_fn(unit(64), |x| (2.0 * PI * x).cos());
        let cs = conserved_quantities(&f, 1.0).unwrap();
        assert!((cs.e - expected).abs() < 1e-14);
    }

    #[test]
    fn interpolant_matches_closed_form_off_grid() {
        let f = PeriodicField::from_fn(unit(32), |x| {
            (2.0 * PI * x).sin() + 0.5 * (6.0 * PI * x).cos()
        });
        let interp = TrigInterpolant::new(&f, 1e-14);
        assert_eq!(interp.bandwidth(), 3);
        for &x in &[0.01234, 0.5, 0.77777] {
            let (v, dv, _) = interp.value_and_derivatives(x);
            let exact = (2.0 * PI * x).sin() + 0.5 * (6.0 * PI * x).cos();
            let dexact = 2.0 * PI * (2.0 * PI * x).cos() - 3.0 * PI * (6.0 * PI * x).sin();
            assert!((v - exact).abs() < 1e-13);
            assert!((dv - dexact).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_preserves_band_limited_field() {
        let f = PeriodicField::from_fn(unit(32), |x| {
            (2.0 * PI * x).sin() + 0.25 * (8.0 * PI * x).cos()
        });
        let fine = f.resample(unit(128)).unwrap();
        let expect: Vec<f64> = unit(128)
            .abscissae()
            .iter()
            .map(|x| (2.0 * PI * x).sin() + 0.25 * (8.0 * PI * x).cos())
            .collect();
        assert!(max_diff(fine.values(), &expect) < 1e-13);
    }

    fn band_limited(coefs: &[(f64, f64)], n: usize) -> PeriodicField {
        PeriodicField::from_fn(unit(n), |x| {
            coefs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let k = 2.0 * PI * (i + 1) as f64 * x;
                    a * k.cos() + b * k.sin()
                })
                .sum::<f64>()
        })
    }

    proptest! {
        #[test]
        fn round_trip_transform(vals in proptest::collection::vec(-10.0f64..10.0, 64)) {
            let g = unit(64);
            let f = PeriodicField::from_values(g, vals.clone()).unwrap();
            let back = PeriodicField::from_coefficients(g, f.coefficients().to_vec()).unwrap();
            let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            prop_assert!(max_diff(back.values(), &vals) < 1e-12 * scale);
            let mean = vals.iter().sum::<f64>() / 64.0;
            prop_assert!((f.mean() - mean).abs() < 1e-12 * scale);
        }

        #[test]
        fn derivative_inverts_antiderivative(
            coefs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8),
            offset in -2.0f64..2.0,
        ) {
            let f = band_limited(&coefs, 64);
            let g = antiderivative_zero_mean(&f).unwrap();
            let back = spectral_derivative(&g);
            prop_assert!(max_diff(back.values(), f.values()) < 1e-12);
            prop_assert!(g.mean().abs() < 1e-15);
            // Shifted data is rejected, its projection accepted.
            let shifted = PeriodicField::from_values(*f.grid(), f.values().iter().map(|v| v + offset + 1e-3 * offset.signum()).collect()).unwrap();
            prop_assert!(antiderivative_zero_mean(&shifted).is_err());
            prop_assert!(antiderivative_zero_mean(&shifted.project_zero_mean()).is_ok());
        }

        #[test]
        fn derivative_agrees_with_fourth_order_differences(
            coefs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..4),
        ) {
            // Error of the 5-point stencil is bounded by h^4 / 30 |f^(5)|.
            let mut errs = Vec::new();
            for &n in &[128usize, 256] {
                let f = band_limited(&coefs, n);
                let d = spectral_derivative(&f);
                let v = f.values();
                let h = f.grid().dx();
                let err = (0..n).map(|j| {
                    let at = |o: isize| v[((j as isize + o).rem_euclid(n as isize)) as usize];
                    let fd = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h);
                    (fd - d.values()[j]).abs()
                }).fold(0.0, f64::max);
                let f5: f64 = coefs.iter().enumerate().map(|(i, (a, b))| {
                    (2.0 * PI * (i + 1) as f64).powi(5) * (a.abs() + b.abs())
                }).sum();
                prop_assert!(err <= h.powi(4) / 30.0 * f5 + 1e-9);
                errs.push(err);
            }
            if errs[0] > 1e-8 {
                prop_assert!(errs[0] / errs[1] > 12.0);
            }
        }

        #[test]
        fn q_is_non_negative(vals in proptest::collection::vec(-5.0f64..5.0, 32)) {
            let f = PeriodicField::from_values(unit(32), vals).unwrap().project_zero_mean();
            prop_assert!(conserved_quantities(&f, 1.0).unwrap().q >= 0.0);
        }
    }
}
