//! Initial data and the analytic sufficient conditions for wave breaking.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fourier::{
    self, antiderivative_zero_mean, refined_max, refined_min, spectral_derivative, PeriodicField,
    PeriodicGrid,
};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind {
    /// `a cos(2 pi x) + b sin(4 pi x)` on the unit circle.
    TwoMode {
        a: f64,
        b: f64,
    },
    Sampled(PeriodicField),
    /// `base(n x)`.
    FrequencyScaled {
        base: Box<InitialData>,
        n: usize,
    },
}

/// Initial profile together with the scalars every criterion consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub kind: InitialKind,
    /// `sup |u0|`
    pub sup_abs: f64,
    /// `||u0||_{L^2}`
    pub l2: f64,
    /// `inf u0'`
    pub min_slope: f64,
    /// `sup u0'`
    pub max_slope: f64,
    /// `int (u0')^3`
    pub cube: f64,
}

/// Closed-form scalars of the two-mode family.
pub fn two_mode_quantities(a: f64, b: f64) -> Result<InitialData> {
    if a < 0.0 {
        return Err(Error::NegativeParameter {
            name: "a",
            value: a,
        });
    }
    if b < 0.0 {
        return Err(Error::NegativeParameter {
            name: "b",
            value: b,
        });
    }
    let sup_abs = if b == 0.0 {
        a
    } else {
        let root = (a * a + 32.0 * b * b).sqrt();
        let s = (root - a) / (8.0 * b);
        0.25 * (3.0 * a + root) * (1.0 - s * s).max(0.0).sqrt()
    };
    let m = 2.0 * PI * (a + 2.0 * b);
    // sup u0' = 2 pi max over s of (-a s + 2 b (1 - 2 s^2)), s = sin(2 pi x).
    let max_slope = {
        let at_edge = a - 2.0 * b;
        let interior = if b > 0.0 && a <= 8.0 * b {
            2.0 * b + a * a / (16.0 * b)
        } else {
            f64::NEG_INFINITY
        };
        2.0 * PI * at_edge.max(interior)
    };
    Ok(InitialData {
        kind: InitialKind::TwoMode { a, b },
        sup_abs,
        l2: (0.5 * (a * a + b * b)).sqrt(),
        min_slope: -m,
        max_slope,
        cube: -12.0 * PI.powi(3) * a * a * b,
    })
}

impl InitialData {
    pub fn two_mode(a: f64, b: f64) -> Result<Self> {
        two_mode_quantities(a, b)
    }

    /// Scalars by spectral quadrature and refined extrema of the projected
    /// field.
    pub fn sampled(field: &PeriodicField) -> Self {
        let u = field.project_zero_mean();
        let d = spectral_derivative(&u);
        let dx = u.grid().dx();
        let sup_abs = refined_max(&u).1.max(-refined_min(&u).1);
        let l2 = (u.values().iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
        let cube = d.values().iter().map(|v| v * v * v).sum::<f64>() * dx;
        Self {
            sup_abs,
            l2,
            min_slope: refined_min(&d).1,
            max_slope: refined_max(&d).1,
            cube,
            kind: InitialKind::Sampled(u),
        }
    }

    /// `base(n x)`: amplitude norms are unchanged, slopes scale by `n` and
    /// the cubic slope integral by `n^3`.
    pub fn frequency_scaled(base: InitialData, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "frequency factor must be positive".into(),
            ));
        }
        let f = n as f64;
        Ok(Self {
            sup_abs: base.sup_abs,
            l2: base.l2,
            min_slope: f * base.min_slope,
            max_slope: f * base.max_slope,
            cube: f.powi(3) * base.cube,
            kind: InitialKind::FrequencyScaled {
                base: Box::new(base),
                n,
            },
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.sup_abs == 0.0 && self.l2 == 0.0
    }

    /// `m = -inf u0'`
    pub fn m(&self) -> f64 {
        -self.min_slope
    }

    /// Samples the profile on `grid`, projected to zero mean.
    pub fn sample(&self, grid: PeriodicGrid) -> Result<PeriodicField> {
        match &self.kind {
            InitialKind::TwoMode { a, b } => {
                if grid.length() != 1.0 {
                    return Err(Error::InvalidGrid(
                        "two-mode data lives on the unit circle".into(),
                    ));
                }
                let (a, b) = (*a, *b);
                Ok(PeriodicField::from_fn(grid, |x| {
                    a * (2.0 * PI * x).cos() + b * (4.0 * PI * x).sin()
                })
                .project_zero_mean())
            }
            InitialKind::Sampled(field) => {
                let f = if field.grid().n() == grid.n() {
                    field.clone()
                } else {
                    field.resample(grid)?
                };
                Ok(f.project_zero_mean())
            }
            InitialKind::FrequencyScaled { base, n } => {
                let b = base.sample(grid)?;
                let len = grid.n();
                let values = (0..len).map(|j| b.values()[(n * j) % len]).collect();
                Ok(PeriodicField::from_values(grid, values)?.project_zero_mean())
            }
        }
    }

    pub fn describe(&self) -> serde_json::Value {
        match &self.kind {
            InitialKind::TwoMode { a, b } => json!({ "kind": "two_mode", "a": a, "b": b }),
            InitialKind::Sampled(f) => json!({ "kind": "sampled", "n": f.grid().n() }),
            InitialKind::FrequencyScaled { base, n } => {
                json!({ "kind": "frequency_scaled", "n": n, "base": base.describe() })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub name: &'static str,
    pub satisfied: bool,
    /// Signed distance to the threshold; positive when satisfied.
    pub margin: f64,
    pub time_bound: Option<f64>,
    pub epsilon: Option<f64>,
}

impl CriterionReport {
    fn new(name: &'static str, margin: f64, time_bound: Option<f64>, epsilon: Option<f64>) -> Self {
        let satisfied = margin > 0.0;
        Self {
            name,
            satisfied,
            margin,
            time_bound: time_bound.filter(|_| satisfied),
            epsilon,
        }
    }
}

/// Hunter's condition `m^3 > 4 M (4 + m)`, stated for `gamma = 1` only.
pub fn hunter_criterion(d: &InitialData, gamma: f64) -> Result<CriterionReport> {
    if gamma != 1.0 {
        return Err(Error::NotApplicable(format!(
            "Hunter's condition requires gamma = 1, got {gamma}"
        )));
    }
    let m = d.m();
    let big_m = d.sup_abs;
    let margin = m.powi(3) - 4.0 * big_m * (4.0 + m);
    Ok(CriterionReport::new("hunter", margin, Some(2.0 / m), None))
}

fn cubic_one_threshold(l2: f64, gamma: f64) -> f64 {
    (1.5 * gamma * l2).powf(1.5)
}

/// `int (u0')^3 < -(3 gamma ||u0||_2 / 2)^{3/2}`.
pub fn cubic_criterion_one(d: &InitialData, gamma: f64) -> CriterionReport {
    let margin = -d.cube - cubic_one_threshold(d.l2, gamma);
    CriterionReport::new("cond1", margin, None, None)
}

/// Largest `gamma` for which [`cubic_criterion_one`] still holds, by
/// bisection on the monotone threshold.
pub fn cubic_one_critical_gamma(d: &InitialData) -> Option<f64> {
    if !(d.cube < 0.0) {
        return None;
    }
    if d.l2 == 0.0 {
        return Some(f64::INFINITY);
    }
    let holds = |g: f64| -d.cube > cubic_one_threshold(d.l2, g);
    let mut hi = 1.0;
    while holds(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `int (u0')^3 < 0` and `||u0||_2 > 3 gamma / 4`.
pub fn cubic_criterion_two(d: &InitialData, gamma: f64) -> CriterionReport {
    let margin = (-d.cube).min(d.l2 - 0.75 * gamma);
    CriterionReport::new("cond2", margin, None, None)
}

/// Smallest positive root of an increasing `lhs` with `lhs(0) = 0`.
fn increasing_root(lhs: impl Fn(f64) -> f64, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while lhs(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Root `T1` of `2 sqrt(gamma) T1 (sup + gamma T1 l2)^{1/2} = log(1 + 2 / eps)`.
pub fn find_t1(sup_abs: f64, l2: f64, gamma: f64, epsilon: f64) -> Result<f64> {
    if sup_abs == 0.0 && l2 == 0.0 {
        return Err(Error::DegenerateData(
            "sup |u0| and ||u0||_2 both vanish".into(),
        ));
    }
    if !(epsilon > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidConfig(
            "epsilon and gamma must be positive".into(),
        ));
    }
    let target = (2.0 / epsilon).ln_1p();
    Ok(increasing_root(|t| t1_lhs(sup_abs, l2, gamma, t), target))
}

pub fn t1_lhs(sup_abs: f64, l2: f64, gamma: f64, t: f64) -> f64 {
    2.0 * gamma.sqrt() * t * (sup_abs + gamma * t * l2).sqrt()
}

const EPS_DECADES: (i32, i32) = (-4, 4);
const EPS_PER_DECADE: usize = 64;

/// Maximizes `margin(eps)` over a log grid refined by golden-section search.
fn maximize_over_epsilon(margin: impl Fn(f64) -> f64) -> (f64, f64) {
    let count = (EPS_DECADES.1 - EPS_DECADES.0) as usize * EPS_PER_DECADE;
    let log_eps = |i: usize| EPS_DECADES.0 as f64 + i as f64 / EPS_PER_DECADE as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..=count {
        let v = margin(10f64.powf(log_eps(i)));
        if v > best.1 {
            best = (i, v);
        }
    }
    let lo = log_eps(best.0.saturating_sub(1));
    let hi = log_eps((best.0 + 1).min(count));
    let (s, neg) = fourier::golden_min(|s| -margin(10f64.powf(s)), lo, hi, 100);
    if -neg >= best.1 {
        (10f64.powf(s), -neg)
    } else {
        (10f64.powf(log_eps(best.0)), best.1)
    }
}

/// Characteristics criterion: some `eps > 0` with
/// `inf u0' <= -(1 + eps) sqrt(gamma) (sup + gamma T1(eps) l2)^{1/2}`.
pub fn characteristics_criterion(d: &InitialData, gamma: f64) -> CriterionReport {
    if d.is_trivial() {
        return CriterionReport::new("charac", 0.0, None, None);
    }
    let m = d.m();
    let margin = |eps: f64| {
        let t1 = find_t1(d.sup_abs, d.l2, gamma, eps).expect("non-degenerate data");
        m - (1.0 + eps) * (gamma * (d.sup_abs + gamma * t1 * d.l2)).sqrt()
    };
    let (eps, best) = maximize_over_epsilon(margin);
    let t1 = find_t1(d.sup_abs, d.l2, gamma, eps).ok();
    CriterionReport::new("charac", best, t1, Some(eps))
}

/// Samples on the symmetric interval `[-half_width, half_width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineData {
    pub half_width: f64,
    pub values: Vec<f64>,
}

impl LineData {
    pub fn from_fn(half_width: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = 2.0 * half_width / n as f64;
        Self {
            half_width,
            values: (0..n).map(|j| f(-half_width + j as f64 * h)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineReport {
    pub report: CriterionReport,
    pub q: f64,
    pub e: f64,
    pub sup_abs: f64,
    pub min_slope: f64,
    /// Growth constant of the `L^inf` bound on the line.
    pub growth: f64,
}

/// Characteristics criterion on the infinite line, evaluated by quadrature
/// on a truncated interval.
pub fn line_criterion(data: &LineData, gamma: f64) -> Result<LineReport> {
    let n = data.values.len();
    let grid = PeriodicGrid::new(n, 2.0 * data.half_width)?;
    let u = PeriodicField::from_values(grid, data.values.clone())?;
    let peak = u.max_abs();
    let edge = 4.min(n / 2);
    let tail = data.values[..edge]
        .iter()
        .chain(&data.values[n - edge..])
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let limit = 1e-10 * peak;
    if tail > limit {
        return Err(Error::TailTooLarge { tail, limit });
    }
    let periodic = antiderivative_zero_mean(&u)?;
    let shift = periodic.values()[0];
    let dx = grid.dx();
    let q = u.values().iter().map(|v| v * v).sum::<f64>() * dx;
    let e = u
        .values()
        .iter()
        .zip(periodic.values())
        .map(|(v, p)| {
            let g = p - shift;
            gamma * g * g + v * v * v / 3.0
        })
        .sum::<f64>()
        * dx;
    if peak == 0.0 {
        return Ok(LineReport {
            report: CriterionReport::new("line", 0.0, None, None),
            q,
            e,
            sup_abs: 0.0,
            min_slope: 0.0,
            growth: 0.0,
        });
    }
    let sup_abs = refined_max(&u).1.max(-refined_min(&u).1);
    let min_slope = refined_min(&spectral_derivative(&u)).1;
    let growth = (gamma / 2.0).sqrt() * (e + gamma * q + q * sup_abs / 3.0).max(0.0).sqrt();
    let bound = move |t: f64| sup_abs + growth * t + gamma * q * t * t / 6.0;
    let t1 = move |eps: f64| {
        increasing_root(
            |t| 2.0 * gamma.sqrt() * t * bound(t).sqrt(),
            (2.0 / eps).ln_1p(),
        )
    };
    let m = -min_slope;
    let (eps, best) =
        maximize_over_epsilon(|eps| m - (1.0 + eps) * (gamma * bound(t1(eps))).sqrt());
    Ok(LineReport {
        report: CriterionReport::new("line", best, Some(t1(eps)), Some(eps)),
        q,
        e,
        sup_abs,
        min_slope,
        growth,
    })
}

/// Verdicts of the four circle criteria at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaSet {
    /// `None` when `gamma != 1`.
    pub hunter: Option<CriterionReport>,
    pub cond1: CriterionReport,
    pub cond2: CriterionReport,
    pub charac: CriterionReport,
}

pub fn evaluate_all(d: &InitialData, gamma: f64) -> CriteriaSet {
    CriteriaSet {
        hunter: hunter_criterion(d, gamma).ok(),
        cond1: cubic_criterion_one(d, gamma),
        cond2: cubic_criterion_two(d, gamma),
        charac: characteristics_criterion(d, gamma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn single_cosine_closed_forms() {
        let d = two_mode_quantities(0.3, 0.0).unwrap();
        assert_eq!(d.sup_abs, 0.3);
        assert!((d.m() - 2.0 * PI * 0.3).abs() < 1e-15);
        assert_eq!(d.cube, 0.0);
        assert!((d.max_slope - 2.0 * PI * 0.3).abs() < 1e-15);
    }

    #[test]
    fn pure_sine_mode_closed_forms() {
        let d = two_mode_quantities(0.0, 0.7).unwrap();
        assert!((d.sup_abs - 0.7).abs() < 1e-15);
        assert!((d.m() - 4.0 * PI * 0.7).abs() < 1e-14);
    }

    #[test]
    fn negative_parameters_rejected() {
        assert!(matches!(
            two_mode_quantities(-0.1, 0.0),
            Err(Error::NegativeParameter { name: "a", .. })
        ));
        assert!(matches!(
            two_mode_quantities(0.0, -1.0),
            Err(Error::NegativeParameter { name: "b", .. })
        ));
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let grid = PeriodicGrid::unit(4096).unwrap();
        for &(a, b) in &[
            (0.05, 0.0),
            (0.01, 0.005),
            (0.0, 0.005),
            (1.0, 1.0),
            (3.0, 0.2),
            (0.1, 7.0),
        ] {
            let closed = two_mode_quantities(a, b).unwrap();
            let quad = InitialData::sampled(&closed.sample(grid).unwrap());
            assert!(
                rel(quad.sup_abs, closed.sup_abs) < 1e-10,
                "sup at ({a},{b})"
            );
            assert!(
                rel(quad.min_slope, closed.min_slope) < 1e-10,
                "m at ({a},{b})"
            );
            assert!(
                rel(quad.max_slope, closed.max_slope) < 1e-10,
                "M' at ({a},{b})"
            );
            assert!(rel(quad.l2, closed.l2) < 1e-10);
            if b > 0.0 && a > 0.0 {
                assert!(rel(quad.cube, closed.cube) < 1e-10);
            } else {
                assert!(quad.cube.abs() < 1e-12 * (a + b).powi(3).max(1e-300) * 1e3);
            }
        }
    }

    #[test]
    fn hunter_examples() {
        let zero = two_mode_quantities(0.0, 0.0).unwrap();
        assert!(!hunter_criterion(&zero, 1.0).unwrap().satisfied);

        let d = two_mode_quantities(0.05, 0.0).unwrap();
        let r = hunter_criterion(&d, 1.0).unwrap();
        let m = 2.0 * PI * 0.05;
        assert!((m.powi(3) - 0.0310).abs() < 1e-4);
        assert!((4.0 * 0.05 * (4.0 + m) - 0.863).abs() < 1e-3);
        assert!(!r.satisfied);
        assert!(r.time_bound.is_none());

        let r = hunter_criterion(&two_mode_quantities(0.0, 5.0).unwrap(), 1.0).unwrap();
        assert!(r.satisfied);
        assert!((r.time_bound.unwrap() - 1.0 / (10.0 * PI)).abs() < 1e-15);

        assert!(matches!(
            hunter_criterion(&d, 2.0),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn cubic_one_examples() {
        let d = two_mode_quantities(0.05, 0.0).unwrap();
        assert!(!cubic_criterion_one(&d, 1.0).satisfied);

        let d = two_mode_quantities(1.0, 1.0).unwrap();
        assert!((d.cube + 372.1).abs() < 0.1);
        assert!((cubic_one_threshold(d.l2, 1.0) - 1.837).abs() < 1e-3);
        assert!(cubic_criterion_one(&d, 1.0).satisfied);

        // Monotone in gamma; the critical value solves -cube = (3 g l2 / 2)^{3/2}.
        let g_star = cubic_one_critical_gamma(&d).unwrap();
        let closed = 2.0 / (3.0 * d.l2) * (-d.cube).powf(2.0 / 3.0);
        assert!(rel(g_star, closed) < 1e-12);
        assert!(cubic_criterion_one(&d, 0.99 * g_star).satisfied);
        assert!(!cubic_criterion_one(&d, 1.01 * g_star).satisfied);
        assert!(cubic_one_critical_gamma(&two_mode_quantities(0.5, 0.0).unwrap()).is_none());
    }

    #[test]
    fn cubic_two_examples() {
        let d = two_mode_quantities(1.0, 1.0).unwrap();
        assert!((d.l2 - 1.0).abs() < 1e-15);
        assert!(cubic_criterion_two(&d, 1.0).satisfied);
        assert!(!cubic_criterion_two(&d, 2.0).satisfied);
        assert!(!cubic_criterion_two(&two_mode_quantities(0.05, 0.0).unwrap(), 1.0).satisfied);
    }

    #[test]
    fn t1_examples() {
        assert!(find_t1(1.0, 1.0, 1.0, 1e9).unwrap() < 1e-8);
        assert!(matches!(
            find_t1(0.0, 0.0, 1.0, 1.0),
            Err(Error::DegenerateData(_))
        ));

        // Independent oracle: plain bisection of 2 T sqrt(1 + T) = log 2.
        let f = |t: f64| 2.0 * t * (1.0 + t).sqrt() - 2f64.ln();
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let t1 = find_t1(1.0, 1.0, 1.0, 2.0).unwrap();
        assert!((t1 - lo).abs() < 1e-12);
        assert!((t1 - 0.30355).abs() < 1e-5);

        let doubled = find_t1(1.0, 1.0, 2.0, 2.0).unwrap();
        assert!(doubled < t1);
    }

    #[test]
    fn characteristics_examples() {
        let zero = two_mode_quantities(0.0, 0.0).unwrap();
        assert!(!characteristics_criterion(&zero, 1.0).satisfied);

        let d = two_mode_quantities(0.05, 0.0).unwrap();
        let r = characteristics_criterion(&d, 1.0);
        assert!(!r.satisfied);
        assert!(r.time_bound.is_none());

        let d = two_mode_quantities(0.0, 5.0).unwrap();
        let r = characteristics_criterion(&d, 1.0);
        assert!(r.satisfied);
        let eps = r.epsilon.unwrap();
        let t1 = r.time_bound.unwrap();
        assert!((t1 - find_t1(d.sup_abs, d.l2, 1.0, eps).unwrap()).abs() < 1e-14);
        assert!(d.min_slope <= -(1.0 + eps) * (d.sup_abs + t1 * d.l2).sqrt());
    }

    #[test]
    fn epsilon_search_beats_every_grid_point() {
        let d = two_mode_quantities(0.1, 0.15).unwrap();
        let r = characteristics_criterion(&d, 1.0);
        for i in 0..=100 {
            let eps = 10f64.powf(-4.0 + 8.0 * i as f64 / 100.0);
            let t1 = find_t1(d.sup_abs, d.l2, 1.0, eps).unwrap();
            let v = d.m() - (1.0 + eps) * (d.sup_abs + t1 * d.l2).sqrt();
            assert!(v <= r.margin + 1e-12);
        }
    }

    #[test]
    fn line_examples() {
        let bump = |lambda: f64| {
            LineData::from_fn(10.0, 1024, move |x| -2.0 * lambda * x * (-x * x).exp())
        };
        let r = line_criterion(&bump(1.0), 1.0).unwrap();
        // Q = int 4 x^2 exp(-2 x^2) = sqrt(pi / 2); the primitive is exp(-x^2),
        // so E = gamma sqrt(pi / 2) (odd cubic term vanishes).
        let q_exact = (PI / 2.0).sqrt();
        assert!(rel(r.q, q_exact) < 1e-12);
        assert!(rel(r.e, q_exact) < 1e-12);
        assert!(rel(r.sup_abs, 2f64.sqrt() * (-0.5f64).exp()) < 1e-12);
        assert!(rel(r.min_slope, -2.0) < 1e-12);
        // Independent recomputation of the verdict at the reported epsilon.
        let eps = r.report.epsilon.unwrap();
        let c = (0.5 * (r.e + r.q + r.q * r.sup_abs / 3.0)).sqrt();
        let lhs = |t: f64| 2.0 * t * (r.sup_abs + c * t + r.q * t * t / 6.0).sqrt();
        let target = (1.0 + 2.0 / eps).ln();
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lhs(mid) < target {
                lo = mid
            } else {
                hi = mid
            }
        }
        let bound = r.sup_abs + c * lo + r.q * lo * lo / 6.0;
        assert!((r.report.margin - (2.0 - (1.0 + eps) * bound.sqrt())).abs() < 1e-9);
        assert!(r.report.satisfied);

        let zero = line_criterion(&LineData::from_fn(10.0, 256, |_| 0.0), 1.0).unwrap();
        assert!(!zero.report.satisfied);

        let margins: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&l| line_criterion(&bump(l), 1.0).unwrap().report.margin)
            .collect();
        assert!(margins[0] < margins[1] && margins[1] < margins[2]);
        assert!(line_criterion(&bump(100.0), 1.0).unwrap().report.satisfied);

        let wide = LineData::from_fn(2.0, 256, |x| -2.0 * x * (-x * x).exp());
        assert!(matches!(
            line_criterion(&wide, 1.0),
            Err(Error::TailTooLarge { .. })
        ));
        let massive = LineData::from_fn(10.0, 256, |x| (-x * x).exp());
        assert!(matches!(
            line_criterion(&massive, 1.0),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn frequency_scaling_eventually_breaks() {
        let grid = PeriodicGrid::unit(4096).unwrap();
        let base = InitialData::sampled(&PeriodicField::from_fn(grid, |x| (2.0 * PI * x).cos()));
        let mut n0 = None;
        for n in 1..=64 {
            let d = InitialData::frequency_scaled(base.clone(), n).unwrap();
            assert!(rel(d.l2, base.l2) < 1e-15 && d.sup_abs == base.sup_abs);
            let sampled = InitialData::sampled(&d.sample(grid).unwrap());
            assert!(rel(sampled.min_slope, n as f64 * base.min_slope) < 1e-10);
            assert!(rel(sampled.l2, base.l2) < 1e-10);
            let ok = characteristics_criterion(&d, 1.0).satisfied;
            if let Some(first) = n0 {
                assert!(ok, "satisfied at n0 = {first} but not at {n}");
            } else if ok {
                n0 = Some(n);
            }
        }
        assert!(n0.is_some());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn t1_is_smallest_root(sup in 0.0f64..5.0, l2 in 0.01f64..5.0, gamma in 0.1f64..3.0, le in -3.0f64..3.0) {
            let eps = 10f64.powf(le);
            let t1 = find_t1(sup, l2, gamma, eps).unwrap();
            let target = (2.0 / eps).ln_1p();
            prop_assert!((t1_lhs(sup, l2, gamma, t1) - target).abs() < 1e-10);
            prop_assert!(t1_lhs(sup, l2, gamma, 0.5 * t1) < target);
        }

        #[test]
        fn criteria_translation_invariant(a in 0.0f64..0.3, b in 0.0f64..0.3, shift in 0.0f64..1.0) {
            let grid = PeriodicGrid::unit(256).unwrap();
            let f = |x: f64| a * (2.0 * PI * x).cos() + b * (4.0 * PI * x).sin();
            let d0 = InitialData::sampled(&PeriodicField::from_fn(grid, f));
            let d1 = InitialData::sampled(&PeriodicField::from_fn(grid, |x| f(x + shift)));
            let (s0, s1) = (evaluate_all(&d0, 1.0), evaluate_all(&d1, 1.0));
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs());
            prop_assert!(close(s0.cond1.margin, s1.cond1.margin));
            prop_assert!(close(s0.cond2.margin, s1.cond2.margin));
            prop_assert!(close(s0.charac.margin, s1.charac.margin));
            prop_assert!(close(s0.hunter.unwrap().margin, s1.hunter.unwrap().margin));
        }
    }
}
