use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::thomas_solve;

/// Date-0 zero coupon curve `p(0, T)` with its instantaneous forward
/// `f(0, t) = -∂ ln p / ∂T` and the forward slope `∂f(0, t)/∂t`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCurve {
    kind: CurveKind,
}

#[derive(Debug, Clone, PartialEq)]
enum CurveKind {
    /// `p(0, T) = exp(-rate T)`.
    Flat { rate: f64 },
    Spline(LogDiscountSpline),
}

/// Natural cubic spline through `(T_i, ln p(0, T_i))` with flat-forward
/// extrapolation past the last node.
#[derive(Debug, Clone, PartialEq)]
struct LogDiscountSpline {
    t: Vec<f64>,
    ln_p: Vec<f64>,
    /// Second derivatives at the knots; zero at both ends.
    m: Vec<f64>,
    /// Flat forward used beyond the last knot.
    extrapolation_rate: f64,
}

impl LogDiscountSpline {
    fn fit(t: Vec<f64>, ln_p: Vec<f64>) -> Result<Self> {
        let n = t.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut lower = vec![0.0; k];
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = t[i] - t[i - 1];
                let h1 = t[i + 1] - t[i];
                lower[i - 1] = h0;
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((ln_p[i + 1] - ln_p[i]) / h1 - (ln_p[i] - ln_p[i - 1]) / h0);
            }
            thomas_solve(&lower, &diag, &upper, &mut rhs)?;
            m[1..n - 1].copy_from_slice(&rhs);
        }
        let mut s = LogDiscountSpline {
            t,
            ln_p,
            m,
            extrapolation_rate: 0.0,
        };
        let last = *s.t.last().unwrap();
        s.extrapolation_rate = -s.derivative_inside(last, s.t.len() - 2).1;
        Ok(s)
    }

    fn segment(&self, x: f64) -> usize {
        let i = self.t.partition_point(|&k| k <= x);
        i.saturating_sub(1).min(self.t.len() - 2)
    }

    /// (S, S', S'') on segment `i`.
    fn derivative_inside(&self, x: f64, i: usize) -> (f64, f64, f64) {
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        let (y0, y1) = (self.ln_p[i], self.ln_p[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let s = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let ds = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2s = a * m0 + b * m1;
        (s, ds, d2s)
    }

    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let last = *self.t.last().unwrap();
        if x > last {
            let ln_last = *self.ln_p.last().unwrap();
            return (
                ln_last - self.extrapolation_rate * (x - last),
                -self.extrapolation_rate,
                0.0,
            );
        }
        self.derivative_inside(x, self.segment(x))
    }
}

impl InitialCurve {
    /// Analytic curve `p(0, T) = base^{-T}`.
    pub fn flat(base: f64) -> Result<Self> {
        if !(base >= 1.0 && base.is_finite()) {
            return Err(Error::InvalidCurve(format!(
                "flat curve base must be >= 1 for nonnegative forwards, got {base}"
            )));
        }
        Ok(InitialCurve {
            kind: CurveKind::Flat { rate: base.ln() },
        })
    }

    /// Fits a natural cubic spline to `ln p(0, T)` through the given
    /// `(maturity, discount)` nodes. A `(0, 1)` node is prepended if absent.
    pub fn from_nodes(nodes: &[(f64, f64)]) -> Result<Self> {
        let mut t = Vec::with_capacity(nodes.len() + 1);
        let mut p = Vec::with_capacity(nodes.len() + 1);
        if nodes.first().map_or(true, |n| n.0 != 0.0) {
            t.push(0.0);
            p.push(1.0);
        }
        for &(ti, pi) in nodes {
            t.push(ti);
            p.push(pi);
        }
        if t.len() < 2 {
            return Err(Error::InvalidCurve("need at least one positive maturity".into()));
        }
        if p[0] != 1.0 {
            return Err(Error::InvalidCurve(format!("p(0,0) must be 1, got {}", p[0])));
        }
        for w in t.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidCurve(format!(
                    "maturities must be finite and strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        for (i, w) in p.windows(2).enumerate() {
            if !(w[1] > 0.0 && w[1] <= 1.0) {
                return Err(Error::InvalidCurve(format!(
                    "discount at T={} must lie in (0, 1], got {}",
                    t[i + 1],
                    w[1]
                )));
            }
            if !(w[1] < w[0]) {
                return Err(Error::InvalidCurve(format!(
                    "discounts must be strictly decreasing (T={}: {} after {})",
                    t[i + 1],
                    w[1],
                    w[0]
                )));
            }
        }
        let ln_p = p.iter().map(|x| x.ln()).collect();
        let spline = LogDiscountSpline::fit(t, ln_p)?;
        let curve = InitialCurve {
            kind: CurveKind::Spline(spline),
        };
        curve.check_forwards()?;
        Ok(curve)
    }

    /// Parses a text table of `maturity discount` pairs (whitespace or comma
    /// separated), one per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    reason: format!("expected `maturity discount`, got `{line}`"),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    reason: format!("`{s}`: {e}"),
                })
            };
            nodes.push((parse(fields[0])?, parse(fields[1])?));
        }
        Self::from_nodes(&nodes)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidCurve(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check_forwards(&self) -> Result<()> {
        if let CurveKind::Spline(s) = &self.kind {
            for w in s.t.windows(2) {
                for q in 0..=32 {
                    let x = w[0] + (w[1] - w[0]) * q as f64 / 32.0;
                    let f = self.forward(x);
                    if f < -1e-14 {
                        return Err(Error::InvalidCurve(format!(
                            "spline forward rate is negative ({f:.3e}) at T={x:.4}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn ln_discount(&self, t: f64) -> f64 {
        match &self.kind {
            CurveKind::Flat { rate } => -rate * t,
            CurveKind::Spline(s) => s.eval(t).0,
        }
    }

    /// `p(0, T)`.
    pub fn discount(&self, t: f64) -> f64 {
        self.ln_discount(t).exp()
    }

    /// `f(0, t)`.
    pub fn forward(&self, t: f64) -> f64 {
        match &self.kind {
            CurveKind::Flat { rate } => *rate,
            CurveKind::Spline(s) => -s.eval(t).1,
        }
    }

    /// `∂f(0, t)/∂t`.
    pub fn forward_slope(&self, t: f64) -> f64 {
        match &self.kind {
            CurveKind::Flat { .. } => 0.0,
            CurveKind::Spline(s) => -s.eval(t).2,
        }
    }

    /// `∫_t^T f(0, s) ds = ln p(0, t) - ln p(0, T)`.
    pub fn integrated_forward(&self, t: f64, maturity: f64) -> f64 {
        self.ln_discount(t) - self.ln_discount(maturity)
    }

    /// Input nodes (maturity, discount), including the origin. Empty for the
    /// analytic flat curve.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            CurveKind::Flat { .. } => Vec::new(),
            CurveKind::Spline(s) => s.t.iter().zip(&s.ln_p).map(|(t, l)| (*t, l.exp())).collect(),
        }
    }

    /// Flat forward used past the last node (the constant rate for a flat curve).
    pub fn extrapolation_rate(&self) -> f64 {
        match &self.kind {
            CurveKind::Flat { rate } => *rate,
            CurveKind::Spline(s) => s.extrapolation_rate,
        }
    }
}
