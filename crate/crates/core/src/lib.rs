//! Delayed-flux reaction–diffusion on the half-line.
//!
//! The model is `q_t = q_xx - q` for `x > 0` with the membrane flux
//! `q_x(0, t) = -alpha / (1 + q(0, t - tau)^m)`. This crate holds the
//! allocation-only numerics: steady state, spectral analysis, a
//! finite-difference solver, the Green's-function iteration and trajectory
//! diagnostics. File formats and the command line live in `delayflux`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod error;
pub mod fd;
pub mod greens;
pub mod lambert;
pub mod model;
pub mod quadrature;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::{InitialData, ModelParams, PhysicalParams, Profile, SteadyState};
