//! Numerical laboratory for the prescribed fractional Q-curvature equation
//! on the round sphere S^n.
//!
//! The equation asks for a positive function u with
//!
//! ```text
//!     P_sigma u = c(n, sigma) * K * u^{(n + 2 sigma)/(n - 2 sigma)}
//! ```
//!
//! where `P_sigma` is the conformal fractional operator of order
//! `2 sigma in (0, n)` (diagonal on spherical harmonics) and K is a
//! prescribed positive candidate curvature.  The crate provides:
//!
//! * spectral discretization of `P_sigma` on zonal grids (any n) and on full
//!   grids for S^2 / S^3 ([`spectral`]);
//! * the standard-bubble family, interaction quantities, the curvature
//!   functional and its two-term expansion at bubble configurations
//!   ([`bubbles`]);
//! * a normalized-gradient flow plus a subcritical continuation solver, with
//!   a Kazdan-Warner obstruction check ([`flow`]);
//! * critical-points-at-infinity bookkeeping: energy levels, Morse indices,
//!   the counting invariants and pinching-based existence verdicts
//!   ([`morse`]);
//! * a deterministic experiment harness behind the `qcurv` binary
//!   ([`config`], [`runner`]).

pub mod bubbles;
pub mod config;
pub mod error;
pub mod fit;
pub mod flow;
pub mod gauss;
pub mod kfunc;
pub mod morse;
pub mod report;
pub mod runner;
pub mod spectral;
pub mod sphere;

pub use error::{Error, Result};
