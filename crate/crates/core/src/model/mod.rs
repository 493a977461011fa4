//! The financial model: initial discount curve, HJM-SV parameters, PDE
//! coefficients (raw and rescaled), closed-form bond prices and payoffs.

mod caplet;
mod coefficients;
mod curve;
mod params;
mod zcb;

pub use caplet::{caplet_payoff, CapletSpec};
pub use coefficients::{
    pde_coefficients, rescaled_coefficients, PdeCoefficients, RescaledCoefficients, StatePoint,
};
pub use curve::InitialCurve;
pub use params::{ModelParams, TimeFunction};
pub use zcb::{g_factor, reduced_zcb_solution, zcb_closed_form};

/// Reference rate scale `r0` used by the rescaled formulation.
pub const DEFAULT_REFERENCE_RATE: f64 = 1e-2;
