use serde::{Deserialize, Serialize};

use super::{zcb_closed_form, InitialCurve, ModelParams, StatePoint};
use crate::error::{Error, Result};

/// Caplet paying `max(1 - Δ_M p(T, T_M), 0)` at expiry `T`, with simple
/// compounding `Δ_M = 1 + (T_M - T) K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapletSpec {
    pub expiry: f64,
    pub payment: f64,
    pub strike: f64,
}

impl CapletSpec {
    pub fn new(expiry: f64, payment: f64, strike: f64) -> Result<Self> {
        let spec = CapletSpec {
            expiry,
            payment,
            strike,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.expiry > 0.0 && self.expiry.is_finite()) {
            return Err(Error::param("expiry", format!("T must be > 0, got {}", self.expiry)));
        }
        if !(self.payment > self.expiry && self.payment.is_finite()) {
            return Err(Error::param(
                "payment",
                format!("T_M must exceed T (T_M = {}, T = {})", self.payment, self.expiry),
            ));
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::param("strike", format!("K must be > 0, got {}", self.strike)));
        }
        Ok(())
    }

    pub fn delta_m(&self) -> f64 {
        1.0 + (self.payment - self.expiry) * self.strike
    }

    /// Simple forward rate over `[T, T_M]` implied by the initial curve.
    pub fn forward_rate(expiry: f64, payment: f64, curve: &InitialCurve) -> f64 {
        (curve.discount(expiry) / curve.discount(payment) - 1.0) / (payment - expiry)
    }
}

/// Terminal payoff at an unscaled state; `point.t` is ignored (the payoff is
/// always evaluated at the caplet expiry).
pub fn caplet_payoff(
    point: StatePoint,
    spec: &CapletSpec,
    curve: &InitialCurve,
    params: &ModelParams,
) -> f64 {
    let x = point.r - curve.forward(spec.expiry);
    let p = zcb_closed_form(spec.expiry, spec.payment, x, point.y, curve, params.kappa)
        .expect("payment date follows expiry");
    (1.0 - spec.delta_m() * p).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(CapletSpec::new(1.0, 2.0, 0.04).is_ok());
        let e = CapletSpec::new(2.0, 2.0, 0.04).unwrap_err();
        assert!(e.to_string().contains("T_M must exceed T"));
        assert!(CapletSpec::new(0.0, 2.0, 0.04).is_err());
        assert!(CapletSpec::new(1.0, 2.0, 0.0).is_err());
        assert!(CapletSpec::new(1.0, 2.0, 0.04).unwrap().delta_m() > 1.0);
    }

    #[test]
    fn payoff_examples() {
        let c = InitialCurve::flat(1.04).unwrap();
        let p = ModelParams::reference();
        let spec = CapletSpec::new(1.0, 2.0, 0.04).unwrap();
        let f = c.forward(1.0);
        // at the money on a flat curve: 1 - 1.04 * 1.04^{-1} = 0 (up to rounding)
        let atm = caplet_payoff(StatePoint::new(f, 1.0, 0.0, 1.0), &spec, &c, &p);
        assert!(atm.abs() < 1e-15);
        let huge = caplet_payoff(StatePoint::new(1e4, 1.0, 0.0, 1.0), &spec, &c, &p);
        assert!((huge - 1.0).abs() < 1e-12);
        // monotone in r
        let mut last = 0.0;
        for i in 0..100 {
            let v = caplet_payoff(StatePoint::new(i as f64 * 0.002, 1.0, 0.0, 1.0), &spec, &c, &p);
            assert!(v >= last && (0.0..=1.0).contains(&v));
            last = v;
        }
    }

    #[test]
    fn payoff_zero_at_kink() {
        let c = InitialCurve::flat(1.03).unwrap();
        let p = ModelParams::reference();
        let spec = CapletSpec::new(1.0, 1.5, 0.05).unwrap();
        // choose x so that p(T, T_M) = 1 / Δ_M exactly
        let g = crate::model::g_factor(0.5, p.kappa);
        let ratio = c.discount(1.5) / c.discount(1.0);
        let x = (ratio * spec.delta_m()).ln() / g;
        let r = x + c.forward(1.0);
        let v = caplet_payoff(StatePoint::new(r, 1.0, 0.0, 1.0), &spec, &c, &p);
        assert!(v.abs() < 1e-14);
    }
}
