//! Pseudospectral laboratory for the mixed-dispersion biharmonic nonlinear
//! Schrödinger equation
//!
//! ```text
//! i psi_t - gamma Lap^2 psi + Lap psi + |psi|^{2 sigma} psi = 0
//! ```
//!
//! on a periodic box in one or two dimensions: normalized ground states,
//! sharp Gagliardo–Nirenberg constants, the ground-state energy curve and
//! split-step dynamics with blow-up diagnostics.

pub mod error;
pub mod functionals;
pub mod grid;
pub mod dynamics;
pub mod ground_state;
pub mod random;
pub mod report;
pub mod experiments;
pub mod io;
pub mod config;
pub mod run;

pub use error::{Error, ErrorCategory, Result};
pub use functionals::{ModelParams, ScalarTriple};
pub use grid::{Field, GridSpec, SpectralField};
