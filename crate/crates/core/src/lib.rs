//! Finite-difference pricing engine for a single-factor Heath–Jarrow–Morton
//! interest-rate model with stochastic volatility.
//!
//! The model is Markovian in the short rate `r`, a variance factor `v` and an
//! auxiliary convexity state `y`. Prices solve a 3D parabolic/hyperbolic PDE,
//! which this crate discretizes with centered differences on sinh-stretched
//! meshes and integrates backwards in time with a Crank–Nicolson / Douglas
//! ADI scheme. A Monte Carlo pricer on the same SDE system serves as an
//! independent cross-check.
//!
//! Internally the solver works in rescaled variables `r̃ = r / r0` and
//! `ỹ = y / r0²`; public pricing entry points take and report unscaled rates.

pub mod discretization;
pub mod error;
pub mod instruments;
pub mod mc;
pub mod mesh;
pub mod model;
pub mod par;
pub mod solver;

pub use error::{Error, Result};
pub use par::Execution;
