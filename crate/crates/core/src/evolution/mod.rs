//! Time integration of `u_t + u u_x = gamma d_x^{-1} u` on the unit circle.

mod blowup;
pub mod io;
mod simulate;
mod solver;

pub use blowup::{
    estimate_blowup, estimate_from_series, fit_threshold, least_squares_line, BlowupEstimate,
    MIN_WINDOW, RESOLUTION_TOL,
};
pub use simulate::{simulate, SimulationConfig, SimulationRecord, Termination, BOUND_TOL};
pub use solver::{rhs, rhs_with, step, step_with, Diagnostics, Model, Solver};
