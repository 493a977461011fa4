//! Monte Carlo pricer for the HJM-SV state dynamics
//!
//! ```text
//! dx = (-κ x + y) dt + η dW,   dy = (η² - 2κ y) dt,
//! dv = θ (1 - v) dt + ε √v dZ,  dW dZ = ρ dt,   η = √v λ(t) r^γ(t),
//! ```
//! with `r = f(0, t) + x`. It shares no code with the finite-difference
//! solver beyond the model parameters and the closed-form bond price used for
//! the caplet payoff.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{zcb_closed_form, CapletSpec, InitialCurve, ModelParams};
use crate::par::{map_reduce_ordered, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    /// Use `max(v, 0)` in both drift and diffusion of the variance; otherwise
    /// the variance is reflected at zero.
    pub full_truncation: bool,
    /// Paths per independently seeded batch.
    pub batch_size: usize,
    pub execution: Execution,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 200_000,
            steps_per_year: 96,
            seed: 20070101,
            full_truncation: true,
            batch_size: 4096,
            execution: Execution::default(),
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::param("n_paths", "must be at least 1"));
        }
        if self.steps_per_year == 0 {
            return Err(Error::param("steps_per_year", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n_paths`.
    pub std_error: f64,
    pub n_paths: usize,
}

impl McEstimate {
    /// `(value - mean) / std_error`; infinite when the estimate is exact and
    /// `value` differs from it.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = value - self.mean;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        McEstimate {
            mean: self.mean,
            std_error: (var.max(0.0) / self.n as f64).sqrt(),
            n_paths: self.n as usize,
        }
    }
}

/// Standard normal pair `(W, Z)` with correlation `rho`.
pub fn correlated_normals<R: Rng + ?Sized>(rng: &mut R, rho: f64) -> (f64, f64) {
    let w: f64 = rng.sample(StandardNormal);
    let w2: f64 = rng.sample(StandardNormal);
    (w, rho * w + (1.0 - rho * rho).max(0.0).sqrt() * w2)
}

/// Generator of batch `batch` under the root `seed`.
pub fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Markov state of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    /// `∫_0^t x ds` (trapezoidal).
    pub int_x: f64,
}

impl PathState {
    pub fn initial() -> Self {
        PathState {
            t: 0.0,
            x: 0.0,
            y: 0.0,
            v: 1.0,
            int_x: 0.0,
        }
    }

    /// Short rate `f(0, t) + x`.
    pub fn rate(&self, curve: &InitialCurve) -> f64 {
        curve.forward(self.t) + self.x
    }

    /// Advances by `dt` given the correlated normals `(w, z)`.
    pub fn advance(&mut self, dt: f64, w: f64, z: f64, params: &ModelParams, curve: &InitialCurve, full_truncation: bool) {
        let t = self.t;
        let kappa = params.kappa;
        let v_pos = self.v.max(0.0);
        let r_pos = (curve.forward(t) + self.x).max(0.0);
        let eta = v_pos.sqrt() * params.lambda_at(t) * r_pos.powf(params.gamma_at(t));
        let sq = dt.sqrt();

        let x_next = self.x + (-kappa * self.x + self.y) * dt + eta * sq * w;
        let y_next = self.y * (-2.0 * kappa * dt).exp() + eta * eta * dt * (-kappa * dt).exp();
        let drift_v = if full_truncation { v_pos } else { self.v };
        let mut v_next = self.v + params.theta * (1.0 - drift_v) * dt + params.eps_at(t) * v_pos.sqrt() * sq * z;
        if !full_truncation {
            v_next = v_next.abs();
        }

        self.int_x += 0.5 * (self.x + x_next) * dt;
        self.x = x_next;
        self.y = y_next;
        self.v = v_next;
        self.t = t + dt;
    }
}

fn time_grid(horizon: f64, steps_per_year: usize) -> (usize, f64) {
    if horizon <= 0.0 {
        return (0, 0.0);
    }
    let n = (horizon * steps_per_year as f64 - 1e-9).ceil().max(1.0) as usize;
    (n, horizon / n as f64)
}

/// Simulates one path to `horizon`, drawing normals from `rng`.
pub fn simulate_path<R: Rng + ?Sized>(
    rng: &mut R,
    horizon: f64,
    params: &ModelParams,
    curve: &InitialCurve,
    cfg: &McConfig,
) -> Vec<PathState> {
    let (n, dt) = time_grid(horizon, cfg.steps_per_year);
    let mut s = PathState::initial();
    let mut out = Vec::with_capacity(n + 1);
    out.push(s);
    for step in 0..n {
        let (w, z) = correlated_normals(rng, params.rho);
        s.advance(dt, w, z, params, curve, cfg.full_truncation);
        if step + 1 == n {
            s.t = horizon;
        }
        out.push(s);
    }
    out
}

/// Shared driver: `payoff(state at horizon, discount factor)` averaged over paths.
fn estimate<F>(horizon: f64, params: &ModelParams, curve: &InitialCurve, cfg: &McConfig, payoff: F) -> Result<McEstimate>
where
    F: Fn(&PathState, f64) -> f64 + Sync + Send,
{
    cfg.validate()?;
    params.validate()?;
    let (n_steps, dt) = time_grid(horizon, cfg.steps_per_year);
    let int_f = -curve.ln_discount(horizon);
    let n_batches = cfg.n_paths.div_ceil(cfg.batch_size);
    let stats = map_reduce_ordered(
        cfg.execution,
        n_batches,
        |b| {
            let mut rng = batch_rng(cfg.seed, b as u64);
            let paths = cfg.batch_size.min(cfg.n_paths - b * cfg.batch_size);
            let mut acc = Welford::default();
            for _ in 0..paths {
                let mut s = PathState::initial();
                for _ in 0..n_steps {
                    let (w, z) = correlated_normals(&mut rng, params.rho);
                    s.advance(dt, w, z, params, curve, cfg.full_truncation);
                }
                s.t = horizon;
                acc.push(payoff(&s, (-(int_f + s.int_x)).exp()));
            }
            acc
        },
        Welford::default(),
        Welford::merge,
    );
    Ok(stats.estimate())
}

/// `E[exp(-∫_0^T r dt)]`, which should reproduce `p(0, T)`.
pub fn simulate_zcb(maturity: f64, curve: &InitialCurve, params: &ModelParams, cfg: &McConfig) -> Result<McEstimate> {
    if maturity < 0.0 {
        return Err(Error::param("maturity", "must be >= 0"));
    }
    estimate(maturity, params, curve, cfg, |_, disc| disc)
}

/// Caplet value `E[exp(-∫_0^T r dt) max(1 - Δ_M p(T, T_M), 0)]`.
pub fn simulate_caplet(spec: &CapletSpec, curve: &InitialCurve, params: &ModelParams, cfg: &McConfig) -> Result<McEstimate> {
    spec.validate()?;
    let delta = spec.delta_m();
    estimate(spec.expiry, params, curve, cfg, move |s, disc| {
        let p = zcb_closed_form(spec.expiry, spec.payment, s.x, s.y, curve, params.kappa).unwrap_or(0.0);
        disc * (1.0 - delta * p).max(0.0)
    })
}

/// Caplet value when the rate volatility vanishes, from the state
/// `(x0, y0)` at time 0: integrates `x' = -κx + y`, `y' = -2κy` and the
/// discount along the characteristic with `n` RK4 steps.
pub fn characteristic_caplet_price(
    spec: &CapletSpec,
    curve: &InitialCurve,
    kappa: f64,
    x0: f64,
    y0: f64,
    n: usize,
) -> Result<f64> {
    spec.validate()?;
    let n = n.max(1);
    let h = spec.expiry / n as f64;
    let rhs = |s: [f64; 3]| [-kappa * s[0] + s[1], -2.0 * kappa * s[1], s[0]];
    let mut s = [x0, y0, 0.0];
    for _ in 0..n {
        let add = |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
        let k1 = rhs(s);
        let k2 = rhs(add(s, k1, 0.5 * h));
        let k3 = rhs(add(s, k2, 0.5 * h));
        let k4 = rhs(add(s, k3, h));
        for q in 0..3 {
            s[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        }
    }
    let disc = curve.discount(spec.expiry) * (-s[2]).exp();
    let p = zcb_closed_form(spec.expiry, spec.payment, s[0], s[1], curve, kappa)?;
    Ok(disc * (1.0 - spec.delta_m() * p).max(0.0))
}
