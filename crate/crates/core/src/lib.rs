//! Filtered Lie splitting for the periodic cubic nonlinear Schrödinger
//! equation `i u_t = -Δu - μ|u|²u` on the two-dimensional torus, with a
//! Fourier pseudospectral discretization in space.
//!
//! - [`spectral`]: band-limited fields, DFT, trigonometric interpolation,
//!   the square frequency filter and the norms.
//! - [`splitting`]: the time stepper and the evolution loop.
//! - [`roughdata`]: reproducible random initial data of given regularity.
//! - [`bourgain`] and [`probe`]: discrete Bourgain norms of trajectories and
//!   empirical estimate probes.
//! - [`harness`]: reference solutions, convergence sweeps, order fits and
//!   CSV / plot-data export.
//! - [`snapshot`]: the `.nls2` binary field format.

pub mod bourgain;
pub mod error;
mod fft;
pub mod harness;
mod par;
pub mod probe;
pub mod roughdata;
pub mod snapshot;
pub mod spectral;
pub mod splitting;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{CutoffSpec, GridField, SpectralField};
pub use splitting::{Mu, SchemeParams};
