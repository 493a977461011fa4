use super::InitialCurve;
use crate::error::{Error, Result};

/// Below this `|κ s|` the bond duration factor uses its first-order expansion.
const SMALL_KAPPA_S: f64 = 1e-8;

/// Duration factor `G(s) = (1 - e^{-κ s}) / κ`, with limit `G(s) = s` as κ → 0.
pub fn g_factor(s: f64, kappa: f64) -> f64 {
    let ks = kappa * s;
    if ks.abs() < SMALL_KAPPA_S {
        s * (1.0 - 0.5 * ks)
    } else {
        -(-ks).exp_m1() / kappa
    }
}

/// Zero coupon bond price `p(t, T)` given the Markov states `x = r - f(0,t)`
/// and `y`.
pub fn zcb_closed_form(
    t: f64,
    maturity: f64,
    x: f64,
    y: f64,
    curve: &InitialCurve,
    kappa: f64,
) -> Result<f64> {
    if maturity < t {
        return Err(Error::Domain(format!("maturity {maturity} precedes time {t}")));
    }
    let g = g_factor(maturity - t, kappa);
    let ln = curve.ln_discount(maturity) - curve.ln_discount(t) - g * x - 0.5 * g * g * y;
    Ok(ln.exp())
}

/// Bond price solving the κ = 0 reduced transport problem, written in terms of
/// the short rate `r` rather than the deviation `x`.
pub fn reduced_zcb_solution(
    t: f64,
    maturity: f64,
    r: f64,
    y: f64,
    curve: &InitialCurve,
) -> Result<f64> {
    if maturity < t {
        return Err(Error::Domain(format!("maturity {maturity} precedes time {t}")));
    }
    let tau = maturity - t;
    let integral = curve.integrated_forward(t, maturity);
    Ok((-integral - tau * (r - curve.forward(t)) - 0.5 * tau * tau * y).exp())
}
