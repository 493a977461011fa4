use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A deterministic function of calendar time (years).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeFunction {
    Constant(f64),
    /// `values[i]` holds on `[times[i-1], times[i])`, with `times[-1] = 0`;
    /// the last value extends to infinity. `values.len() == times.len() + 1`.
    Piecewise { times: Vec<f64>, values: Vec<f64> },
}

impl TimeFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant(c) => *c,
            TimeFunction::Piecewise { times, values } => {
                let idx = times.partition_point(|&b| b <= t);
                values[idx.min(values.len() - 1)]
            }
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            TimeFunction::Constant(c) => std::slice::from_ref(c),
            TimeFunction::Piecewise { values, .. } => values,
        }
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        if let TimeFunction::Piecewise { times, values } = self {
            if values.len() != times.len() + 1 {
                return Err(Error::param(name, "piecewise function needs times.len() + 1 values"));
            }
            if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| *t <= 0.0) {
                return Err(Error::param(name, "breakpoints must be positive and increasing"));
            }
        }
        if self.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::param(name, "non-finite value"));
        }
        Ok(())
    }
}

impl From<f64> for TimeFunction {
    fn from(c: f64) -> Self {
        TimeFunction::Constant(c)
    }
}

/// Constants and deterministic functions of the HJM-SV model.
///
/// `theta` is the variance mean-reversion speed, not the Crank–Nicolson weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub kappa: f64,
    pub lambda: TimeFunction,
    pub gamma: TimeFunction,
    pub eps: TimeFunction,
    pub theta: f64,
    pub rho: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl ModelParams {
    /// Characteristic market parameters (2007) used throughout the studies.
    pub fn reference() -> Self {
        ModelParams {
            kappa: 0.001,
            lambda: 0.15.into(),
            gamma: 0.9.into(),
            eps: 1.5.into(),
            theta: 0.25,
            rho: -0.75,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::param("kappa", format!("must be >= 0, got {}", self.kappa)));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::param("theta", format!("must be >= 0, got {}", self.theta)));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::param("rho", format!("must lie in [-1, 1], got {}", self.rho)));
        }
        self.lambda.validate("lambda")?;
        self.gamma.validate("gamma")?;
        self.eps.validate("eps")?;
        if let Some(g) = self.gamma.values().iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
            return Err(Error::param("gamma", format!("must lie in (0, 1], got {g}")));
        }
        if self.lambda.values().iter().any(|l| *l < 0.0) {
            return Err(Error::param("lambda", "must be >= 0"));
        }
        if self.eps.values().iter().any(|e| *e < 0.0) {
            return Err(Error::param("eps", "must be >= 0"));
        }
        Ok(())
    }

    pub fn lambda_at(&self, t: f64) -> f64 {
        self.lambda.eval(t)
    }

    pub fn gamma_at(&self, t: f64) -> f64 {
        self.gamma.eval(t)
    }

    pub fn eps_at(&self, t: f64) -> f64 {
        self.eps.eval(t)
    }

    /// Local volatility of the short rate, `sqrt(v) λ(t) r^γ(t)`.
    pub fn eta(&self, t: f64, r: f64, v: f64) -> f64 {
        v.max(0.0).sqrt() * self.lambda_at(t) * r.max(0.0).powf(self.gamma_at(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_is_valid() {
        ModelParams::reference().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        let mut p = ModelParams::reference();
        p.rho = -1.5;
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "rho", .. })));
        let mut p = ModelParams::reference();
        p.gamma = 1.2.into();
        assert!(p.validate().is_err());
        let mut p = ModelParams::reference();
        p.gamma = 0.0.into();
        assert!(p.validate().is_err());
        let mut p = ModelParams::reference();
        p.kappa = -0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn piecewise_lookup() {
        let f = TimeFunction::Piecewise {
            times: vec![1.0, 2.0],
            values: vec![0.1, 0.2, 0.3],
        };
        f.validate("f").unwrap();
        assert_eq!(f.eval(0.0), 0.1);
        assert_eq!(f.eval(0.999), 0.1);
        assert_eq!(f.eval(1.0), 0.2);
        assert_eq!(f.eval(5.0), 0.3);
    }
}
