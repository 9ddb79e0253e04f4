use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::simulate::{SimulationRecord, Termination};

pub const MIN_WINDOW: usize = 10;

/// Largest spectral tail share (see [`Diagnostics::tail`]) at which a sample
/// still counts as resolved and may enter the fit.
///
/// [`Diagnostics::tail`]: crate::evolution::Diagnostics::tail
pub const RESOLUTION_TOL: f64 = 1e-5;

/// Least-squares line `B + C t` through `-1 / min u_x` near the singularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupEstimate {
    /// Intercept, the blow-up time estimate.
    pub b: f64,
    /// Slope, close to -1 near the singularity.
    pub c: f64,
    pub window: (f64, f64),
    /// Record indices `[start, end]` of the fitted samples.
    pub start: usize,
    pub end: usize,
    /// Euclidean norm of the fit residuals.
    pub residual: f64,
}

impl BlowupEstimate {
    pub fn samples(&self) -> usize {
        self.end + 1 - self.start
    }

    /// Time at which the fitted line reaches zero, the blow-up time estimate.
    pub fn t_zero(&self) -> f64 {
        -self.b / self.c
    }
}

/// Fit threshold: `5 min_ux(0)`.
pub fn fit_threshold(min_ux0: f64) -> f64 {
    5.0 * min_ux0
}

pub fn estimate_blowup(record: &SimulationRecord) -> Result<BlowupEstimate> {
    if record.terminated != Termination::SlopeBlowup {
        return Err(Error::NoBlowup);
    }
    let tol = record
        .tail
        .first()
        .map_or(RESOLUTION_TOL, |&t0| RESOLUTION_TOL.max(10.0 * t0));
    let resolved = record
        .tail
        .iter()
        .rposition(|&t| t <= tol)
        .map_or(0, |i| i + 1);
    estimate_from_series(&record.times[..resolved], &record.min_ux[..resolved])
}

/// Fits over the final stretch where `min_ux` stays at or below the
/// threshold, up to the last finite sample.
pub fn estimate_from_series(times: &[f64], min_ux: &[f64]) -> Result<BlowupEstimate> {
    let Some(end) = min_ux.iter().rposition(|v| v.is_finite()) else {
        return Err(Error::InsufficientWindow {
            found: 0,
            needed: MIN_WINDOW,
        });
    };
    let threshold = fit_threshold(min_ux[0]);
    let start = match min_ux[..=end].iter().rposition(|&v| v > threshold) {
        Some(i) => i + 1,
        None => 0,
    };
    let found = (end + 1).saturating_sub(start);
    if found < MIN_WINDOW {
        return Err(Error::InsufficientWindow {
            found,
            needed: MIN_WINDOW,
        });
    }
    let ts = &times[start..=end];
    let ys: Vec<f64> = min_ux[start..=end].iter().map(|m| -1.0 / m).collect();
    let (b, c) = least_squares_line(ts, &ys);
    let residual = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - b - c * t).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(BlowupEstimate {
        b,
        c,
        window: (ts[0], ts[ts.len() - 1]),
        start,
        end,
        residual,
    })
}

/// Intercept and slope of the ordinary least-squares line.
pub fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_rate_law_is_recovered() {
        let times: Vec<f64> = (0..1990).map(|i| i as f64 * 0.001).collect();
        let min_ux: Vec<f64> = times.iter().map(|t| -1.0 / (2.0 - t)).collect();
        let est = estimate_from_series(&times, &min_ux).unwrap();
        assert!((est.b - 2.0).abs() < 1e-12);
        assert!((est.c + 1.0).abs() < 1e-12);
        assert!(est.residual < 1e-12);
        assert!(est.window.0 >= 1.6 - 1e-12);
        assert!((est.t_zero() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn short_window_is_rejected() {
        let times: Vec<f64> = (0..1606).map(|i| i as f64 * 0.001).collect();
        let min_ux: Vec<f64> = times.iter().map(|t| -1.0 / (2.0 - t)).collect();
        assert!(matches!(
            estimate_from_series(&times, &min_ux),
            Err(Error::InsufficientWindow { found: 5..=6, .. })
        ));
    }

    #[test]
    fn trailing_non_finite_samples_are_skipped() {
        let mut times: Vec<f64> = (0..1990).map(|i| i as f64 * 0.001).collect();
        let mut min_ux: Vec<f64> = times
            .iter()
            .map(|t| -1.0 / (3.0 - t) * 0.5 - 1.0 / (2.0 - t))
            .collect();
        times.push(1.99);
        min_ux.push(f64::NAN);
        let est = estimate_from_series(&times, &min_ux).unwrap();
        assert_eq!(est.end, 1989);
    }
}
