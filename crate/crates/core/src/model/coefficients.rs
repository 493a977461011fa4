use super::{InitialCurve, ModelParams};

/// A point of the Markov state space at calendar time `t` (years).
///
/// In the unscaled world `r` and `y` carry units of 1/years and 1/years²;
/// rescaled callers pass `r̃ = r / r0` and `ỹ = y / r0²` instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePoint {
    pub r: f64,
    pub v: f64,
    pub y: f64,
    pub t: f64,
}

impl StatePoint {
    pub fn new(r: f64, v: f64, y: f64, t: f64) -> Self {
        StatePoint { r, v, y, t }
    }

    /// Deviation of the short rate from the initial forward, `x = r - f(0, t)`.
    pub fn x(&self, curve: &InitialCurve) -> f64 {
        self.r - curve.forward(self.t)
    }
}

/// Coefficients of the pricing PDE
/// `C_t + ζ_rr C_rr + ζ_vv C_vv + ζ_rv C_rv + μ_r C_r + μ_v C_v + μ_y C_y = r C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeCoefficients {
    pub zeta_rr: f64,
    pub zeta_vv: f64,
    pub zeta_rv: f64,
    pub mu_r: f64,
    pub mu_v: f64,
    pub mu_y: f64,
}

pub fn pde_coefficients(p: StatePoint, params: &ModelParams, curve: &InitialCurve) -> PdeCoefficients {
    let lambda = params.lambda_at(p.t);
    let gamma = params.gamma_at(p.t);
    let eps = params.eps_at(p.t);
    let r_gamma = p.r.max(0.0).powf(gamma);
    let f = curve.forward(p.t);
    let df = curve.forward_slope(p.t);
    let zeta_rr = 0.5 * lambda * lambda * r_gamma * r_gamma * p.v;
    PdeCoefficients {
        zeta_rr,
        zeta_vv: 0.5 * eps * eps * p.v,
        zeta_rv: lambda * r_gamma * eps * params.rho * p.v,
        mu_r: df - params.kappa * (p.r - f) + p.y,
        mu_v: params.theta * (1.0 - p.v),
        mu_y: 2.0 * zeta_rr - 2.0 * params.kappa * p.y,
    }
}

/// Coefficients `h1..h6` of the rescaled equation
/// `r0 C_t̃ + h1 C_rr + h2 C_vv + h3 C_rv + h4 C_r + h5 C_v + h6 C_y = r0 r̃ C`
/// in the variables `r̃ = r/r0`, `ỹ = y/r0²`, `t̃ = r0 t`.
///
/// Since `r0 ∂/∂t̃ = ∂/∂t`, the rescaled equation can be marched in calendar
/// years directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledCoefficients {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h4: f64,
    pub h5: f64,
    pub h6: f64,
}

impl RescaledCoefficients {
    pub fn to_array(self) -> [f64; 6] {
        [self.h1, self.h2, self.h3, self.h4, self.h5, self.h6]
    }
}

/// Evaluates `h1..h6` at a rescaled state; `point.t` is calendar time in years.
pub fn rescaled_coefficients(
    point: StatePoint,
    params: &ModelParams,
    curve: &InitialCurve,
    r0: f64,
) -> RescaledCoefficients {
    let t = point.t;
    let lambda = params.lambda_at(t);
    let gamma = params.gamma_at(t);
    let eps = params.eps_at(t);
    let v = point.v;
    let r_gamma = point.r.max(0.0).powf(gamma);
    let scale = r0.powf(gamma - 1.0);
    let f_scaled = curve.forward(t) / r0;
    let h1 = 0.5 * lambda * lambda * r_gamma * r_gamma * scale * scale * v;
    RescaledCoefficients {
        h1,
        h2: 0.5 * eps * eps * v,
        h3: lambda * r_gamma * eps * params.rho * v * scale,
        h4: curve.forward_slope(t) / r0 - params.kappa * (point.r - f_scaled) + r0 * point.y,
        h5: params.theta * (1.0 - v),
        h6: 2.0 * h1 - 2.0 * params.kappa * point.y,
    }
}
