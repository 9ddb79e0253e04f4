//! Numerical laboratory for `u_t + u u_x = gamma d_x^{-1} u`, the reduced
//! Ostrovsky (Ostrovsky-Hunter) model, on the unit circle.
//!
//! * [`fourier`]: spectral fields, the mean-zero anti-derivative and the
//!   conserved quantities `Q`, `E`.
//! * [`evolution`]: pseudo-spectral RK4 integration, diagnostics and the
//!   blow-up regression.
//! * [`criteria`]: initial data and the analytic wave-breaking criteria.
//! * [`characteristics`]: characteristic curves co-stepped with the solver.
//! * [`wave`]: periodic traveling waves and the corner wave.
//! * [`cli`]: configuration files, parameter scans and the command line.

pub mod characteristics;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod wave;

pub use error::{Error, Result};
pub use fourier::{PeriodicField, PeriodicGrid};
