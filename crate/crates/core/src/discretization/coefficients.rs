use super::Axes;
use crate::model::{rescaled_coefficients, InitialCurve, ModelParams, StatePoint};

/// Source of the variable coefficients of a linear PDE
/// `C_t + h1 C_rr + h2 C_vv + h3 C_rv + h4 C_r + h5 C_v + h6 C_y = c C - s`
/// written in the mesh's physical (rescaled) coordinates.
pub trait PdeModel: Sync {
    /// `[h1, .., h6]` at calendar time `t`.
    fn coefficients(&self, t: f64, r: f64, v: f64, y: f64) -> [f64; 6];

    /// Zero-order coefficient `c`.
    fn reaction(&self, t: f64, r: f64, v: f64, y: f64) -> f64;

    /// Source term `s`; zero for pricing problems.
    fn source(&self, _t: f64, _r: f64, _v: f64, _y: f64) -> f64 {
        0.0
    }

    fn has_source(&self) -> bool {
        false
    }
}

/// The HJM-SV pricing equation in rescaled variables.
#[derive(Debug, Clone)]
pub struct HjmModel {
    pub params: ModelParams,
    pub curve: InitialCurve,
    /// Reference rate scale `r0`.
    pub r0: f64,
}

impl HjmModel {
    pub fn new(params: ModelParams, curve: InitialCurve, r0: f64) -> Self {
        HjmModel { params, curve, r0 }
    }
}

impl PdeModel for HjmModel {
    fn coefficients(&self, t: f64, r: f64, v: f64, y: f64) -> [f64; 6] {
        rescaled_coefficients(StatePoint::new(r, v, y, t), &self.params, &self.curve, self.r0)
            .to_array()
    }

    fn reaction(&self, _t: f64, r: f64, _v: f64, _y: f64) -> f64 {
        self.r0 * r
    }
}

/// Coefficients `g1..g6` of the equation in computational coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricCoefficients {
    pub g: [f64; 6],
    pub reaction: f64,
}

/// Chain-rule correction of `h1..h6` for the sinh metrics, given the first
/// and second Jacobians `(J, J2)` of each direction at the node.
pub fn apply_metric(h: [f64; 6], jr: (f64, f64), jv: (f64, f64), jy: (f64, f64)) -> [f64; 6] {
    let (jr1, jr2) = jr;
    let (jv1, jv2) = jv;
    [
        h[0] / (jr1 * jr1),
        h[1] / (jv1 * jv1),
        h[2] / (jr1 * jv1),
        h[3] / jr1 - h[0] * jr2 / (jr1 * jr1 * jr1),
        h[4] / jv1 - h[1] * jv2 / (jv1 * jv1 * jv1),
        h[5] / jy.0,
    ]
}

/// Metric-corrected coefficients at node `(i, j, k)` and calendar time `t`.
#[inline]
pub fn metric_coefficients(
    model: &dyn PdeModel,
    t: f64,
    axes: &Axes,
    i: usize,
    j: usize,
    k: usize,
) -> MetricCoefficients {
    let (r, v, y) = axes.coords(i, j, k);
    let h = model.coefficients(t, r, v, y);
    let g = apply_metric(
        h,
        (axes.r.j1()[i], axes.r.j2()[i]),
        (axes.v.j1()[j], axes.v.j2()[j]),
        (axes.y.j1()[k], axes.y.j2()[k]),
    );
    MetricCoefficients {
        g,
        reaction: model.reaction(t, r, v, y),
    }
}
