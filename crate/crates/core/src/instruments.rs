//! Pricing entry points: terminal conditions, boundary rules, the solve, and
//! post-processing (spot interpolation and Greeks).
//!
//! Public inputs and outputs are unscaled. Meshes, boundary functions and the
//! solution grid live in the rescaled coordinates `r̃ = r / r0`, `ỹ = y / r0²`.

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::discretization::{Axes, BoundarySpec, Direction, FaceRule, Grid3, HjmModel, InstrumentKind, OneSided};
use crate::error::{Error, Result};
use crate::mesh::{build_axis, snap_center_to_node, Axis, MetricParams};
use crate::model::{caplet_payoff, g_factor, zcb_closed_form, CapletSpec, InitialCurve, ModelParams, StatePoint};
use crate::par::map_indices;
use crate::solver::{run, sample_terminal, smooth_terminal, Problem, SolveReport, SolverConfig};

/// One mesh direction, in rescaled units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub nodes: usize,
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    /// Concentration point; instrument-specific when absent.
    #[serde(default)]
    pub center: Option<f64>,
    /// Nudge `upper` so a node falls exactly on the concentration point.
    #[serde(default)]
    pub snap_center: bool,
}

impl AxisConfig {
    fn params(&self, fallback_center: f64) -> MetricParams {
        let center = self.center.unwrap_or(fallback_center).clamp(self.lower, self.upper);
        MetricParams {
            center,
            alpha: self.alpha,
            lower: self.lower,
            upper: self.upper,
        }
    }

    fn build(&self, fallback_center: f64) -> Result<Axis> {
        let params = self.params(fallback_center);
        if self.snap_center {
            build_axis(snap_center_to_node(params, self.nodes)?, self.nodes)
        } else {
            build_axis(params, self.nodes)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub r: AxisConfig,
    pub v: AxisConfig,
    pub y: AxisConfig,
    /// Rate scale of the rescaled variables.
    pub r0: f64,
    /// Solve bond problems on the full `(r, v, y)` mesh instead of
    /// collapsing the `v` direction.
    pub zcb_full_3d: bool,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            r: AxisConfig {
                nodes: 100,
                lower: 0.0,
                upper: 250.0,
                alpha: 0.05,
                center: None,
                snap_center: false,
            },
            v: AxisConfig {
                nodes: 40,
                lower: 0.0,
                upper: 30.0,
                alpha: 0.5,
                center: Some(0.5),
                snap_center: false,
            },
            y: AxisConfig {
                nodes: 40,
                lower: 0.0,
                upper: 250.0,
                alpha: 0.05,
                center: Some(0.0),
                snap_center: false,
            },
            r0: crate::model::DEFAULT_REFERENCE_RATE,
            zcb_full_3d: false,
        }
    }
}

impl MeshConfig {
    pub fn with_nodes(nr: usize, nv: usize, ny: usize) -> Self {
        let mut cfg = MeshConfig::default();
        cfg.r.nodes = nr;
        cfg.v.nodes = nv;
        cfg.y.nodes = ny;
        cfg
    }

    /// Mesh for bond problems. There is no payoff kink to resolve, so both
    /// rate-like axes use a mild stretch; the far faces carry the exact bond
    /// price, which lets them sit closer in. The spot rate is placed on a
    /// node so the reported price needs no interpolation in `r`.
    pub fn zcb_reference() -> Self {
        let mut cfg = MeshConfig::default();
        cfg.r.upper = 10.0;
        cfg.r.alpha = 5.0;
        cfg.r.snap_center = true;
        cfg.y.upper = 100.0;
        cfg.y.alpha = 100.0;
        cfg
    }

    /// Mesh for caplets: every stretch relaxed to `α = 0.5` so the spot
    /// region, not only the strike, is resolved.
    pub fn caplet_reference() -> Self {
        let mut cfg = MeshConfig::default();
        cfg.r.alpha = 0.5;
        cfg.y.alpha = 0.5;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(Error::param("r0", format!("must be positive, got {}", self.r0)));
        }
        Ok(())
    }

    /// Axes with the `r` direction concentrated at `r_center` (rescaled) and
    /// `v` collapsed to `v_point` when given.
    pub fn build_axes(&self, r_center: f64, v_point: Option<f64>) -> Result<Arc<Axes>> {
        self.validate()?;
        let r = self.r.build(r_center)?;
        let v = match v_point {
            Some(v) => Axis::point(v),
            None => self.v.build(0.5)?,
        };
        let y = self.y.build(0.0)?;
        Ok(Arc::new(Axes::new(r, v, y)))
    }
}

/// Natural valuation state: short rate on the curve, unit variance, `y = 0`.
pub fn default_spot(curve: &InitialCurve) -> StatePoint {
    StatePoint::new(curve.forward(0.0), 1.0, 0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrikeQuote {
    pub strike: f64,
    pub premium: f64,
}

#[derive(Debug, Clone)]
pub struct PriceResult {
    /// Price at the spot.
    pub price: f64,
    /// Closed-form reference when one exists (bonds).
    pub closed_form: Option<f64>,
    /// `∂C/∂r` at the spot, unscaled.
    pub rho: f64,
    /// `∂C/∂v` at the spot.
    pub vega: f64,
    /// `∂C/∂r` over the mesh, unscaled.
    pub rho_grid: Grid3,
    /// `∂C/∂v` over the mesh.
    pub vega_grid: Grid3,
    pub premium_by_strike: Option<Vec<StrikeQuote>>,
    pub report: SolveReport,
    /// Solution at the valuation date, in rescaled coordinates.
    pub grid: Grid3,
    pub spot: StatePoint,
    pub r0: f64,
}

impl PriceResult {
    pub fn error_vs_closed_form(&self) -> Option<f64> {
        self.closed_form.map(|c| (self.price - c).abs())
    }

    pub fn wall_time(&self) -> Duration {
        self.report.wall_time
    }
}

/// Bond price `p(t, T)` as a function of rescaled coordinates.
fn scaled_bond(curve: &InitialCurve, kappa: f64, r0: f64, maturity: f64, t: f64, r: f64, y: f64) -> f64 {
    let t = t.min(maturity);
    let x = r0 * r - curve.forward(t);
    let g = g_factor(maturity - t, kappa);
    (curve.ln_discount(maturity) - curve.ln_discount(t) - g * x - 0.5 * g * g * r0 * r0 * y).exp()
}

/// Boundary rules of the zero coupon bond maturing at `maturity`.
pub fn zcb_boundary(
    maturity: f64,
    curve: &InitialCurve,
    params: &ModelParams,
    r0: f64,
    y_order: OneSided,
) -> BoundarySpec {
    let (c, kappa) = (curve.clone(), params.kappa);
    let closed = FaceRule::dirichlet(move |t, r, _, y| scaled_bond(&c, kappa, r0, maturity, t, r, y));
    BoundarySpec {
        instrument: InstrumentKind::Zcb,
        r_lower: FaceRule::Degenerate(OneSided::Second),
        r_upper: closed.clone(),
        v_lower: FaceRule::Degenerate(OneSided::First),
        v_upper: closed.clone(),
        y_lower: FaceRule::Degenerate(y_order),
        y_upper: closed,
    }
}

/// Boundary rules of a caplet.
pub fn caplet_boundary(
    spec: &CapletSpec,
    curve: &InitialCurve,
    params: &ModelParams,
    r0: f64,
    y_order: OneSided,
) -> BoundarySpec {
    let (c, kappa, s) = (curve.clone(), params.kappa, *spec);
    BoundarySpec {
        instrument: InstrumentKind::Caplet,
        r_lower: FaceRule::Degenerate(OneSided::Second),
        r_upper: FaceRule::constant(0.0),
        v_lower: FaceRule::Degenerate(OneSided::First),
        v_upper: FaceRule::dirichlet(move |t, r, _, y| {
            scaled_bond(&c, kappa, r0, s.expiry, t, r, y) - scaled_bond(&c, kappa, r0, s.payment, t, r, y)
        }),
        y_lower: FaceRule::Degenerate(y_order),
        y_upper: FaceRule::constant(0.0),
    }
}

fn spot_scaled(spot: &StatePoint, r0: f64) -> (f64, f64, f64) {
    (spot.r / r0, spot.v, spot.y / (r0 * r0))
}

fn finish(
    grid: Grid3,
    report: SolveReport,
    spot: StatePoint,
    r0: f64,
    closed_form: Option<f64>,
) -> Result<PriceResult> {
    let (sr, sv, sy) = spot_scaled(&spot, r0);
    let price = interpolate_at(&grid, sr, sv, sy)?;
    let (mut rho_grid, vega_grid) = extract_greeks(&grid);
    rho_grid.data_mut().iter_mut().for_each(|d| *d /= r0);
    let rho = interpolate_at(&rho_grid, sr, sv, sy)?;
    let vega = interpolate_at(&vega_grid, sr, sv, sy)?;
    Ok(PriceResult {
        price,
        closed_form,
        rho,
        vega,
        rho_grid,
        vega_grid,
        premium_by_strike: None,
        report,
        grid,
        spot,
        r0,
    })
}

fn check_spot(axes: &Axes, spot: &StatePoint, r0: f64) -> Result<()> {
    let (sr, sv, sy) = spot_scaled(spot, r0);
    for (axis, z) in [(&axes.r, sr), (&axes.v, sv), (&axes.y, sy)] {
        if !axis.is_collapsed() {
            axis.physical_to_computational(z)?;
        }
    }
    Ok(())
}

/// Prices the zero coupon bond paying 1 at `maturity`.
pub fn price_zcb(
    maturity: f64,
    curve: &InitialCurve,
    params: &ModelParams,
    mesh: &MeshConfig,
    solver: &SolverConfig,
    spot: StatePoint,
) -> Result<PriceResult> {
    params.validate()?;
    if !(maturity >= 0.0 && maturity.is_finite()) {
        return Err(Error::param("maturity", format!("must be >= 0, got {maturity}")));
    }
    let r0 = mesh.r0;
    let v_point = if mesh.zcb_full_3d { None } else { Some(spot.v) };
    let axes = mesh.build_axes(spot.r / r0, v_point)?;
    check_spot(&axes, &spot, r0)?;
    let model = HjmModel::new(params.clone(), curve.clone(), r0);
    let problem = Problem {
        axes: axes.clone(),
        model: &model,
        boundary: zcb_boundary(maturity, curve, params, r0, solver.y_boundary_order),
        terminal: Grid3::filled(axes, 1.0, maturity),
        horizon: maturity,
    };
    let (grid, report) = run(&problem, solver)?;
    let closed = zcb_closed_form(0.0, maturity, spot.x(curve), spot.y, curve, params.kappa)?;
    finish(grid, report, spot, r0, Some(closed))
}

/// Terminal caplet field on `axes` at the expiry.
pub fn caplet_terminal(
    axes: Arc<Axes>,
    spec: &CapletSpec,
    curve: &InitialCurve,
    params: &ModelParams,
    r0: f64,
    solver: &SolverConfig,
) -> Grid3 {
    let payoff = |r: f64, v: f64, y: f64| {
        caplet_payoff(StatePoint::new(r0 * r, v, r0 * r0 * y, spec.expiry), spec, curve, params)
    };
    if solver.smoothing.enabled {
        smooth_terminal(axes, spec.expiry, payoff, solver.smoothing.subsamples, solver.execution)
    } else {
        sample_terminal(axes, spec.expiry, payoff)
    }
}

/// Prices a caplet on the full `(r, v, y)` mesh.
pub fn price_caplet(
    spec: &CapletSpec,
    curve: &InitialCurve,
    params: &ModelParams,
    mesh: &MeshConfig,
    solver: &SolverConfig,
    spot: StatePoint,
) -> Result<PriceResult> {
    spec.validate()?;
    params.validate()?;
    let r0 = mesh.r0;
    let axes = mesh.build_axes(spec.strike / r0, None)?;
    check_spot(&axes, &spot, r0)?;
    let model = HjmModel::new(params.clone(), curve.clone(), r0);
    let problem = Problem {
        axes: axes.clone(),
        model: &model,
        boundary: caplet_boundary(spec, curve, params, r0, solver.y_boundary_order),
        terminal: caplet_terminal(axes, spec, curve, params, r0, solver),
        horizon: spec.expiry,
    };
    let (grid, report) = run(&problem, solver)?;
    finish(grid, report, spot, r0, None)
}

/// Prices caplets over a strike ladder, one independent solve per strike.
#[allow(clippy::too_many_arguments)]
pub fn price_caplet_ladder(
    expiry: f64,
    payment: f64,
    strikes: &[f64],
    curve: &InitialCurve,
    params: &ModelParams,
    mesh: &MeshConfig,
    solver: &SolverConfig,
    spot: StatePoint,
) -> Result<Vec<StrikeQuote>> {
    let quotes = map_indices(solver.execution, strikes.len(), |i| {
        let spec = CapletSpec::new(expiry, payment, strikes[i])?;
        price_caplet(&spec, curve, params, mesh, solver, spot).map(|p| StrikeQuote {
            strike: strikes[i],
            premium: p.price,
        })
    });
    quotes.into_iter().collect()
}

/// Derivative of `u` along `dir` at every node, in physical mesh units:
/// centred differences in computational space divided by the Jacobian,
/// second-order one-sided differences on the faces.
fn axis_derivative(grid: &Grid3, dir: Direction) -> Grid3 {
    let axes = grid.axes().clone();
    let axis = axes.axis(dir);
    let n = axis.len();
    let mut out = Grid3::filled(axes.clone(), 0.0, grid.time());
    if n == 1 {
        return out;
    }
    let dx = axis.dx();
    let stride = axes.stride(dir);
    let u = grid.data();
    for (idx, d) in out.data_mut().iter_mut().enumerate() {
        let (i, j, k) = axes.unravel(idx);
        let p = match dir {
            Direction::R => i,
            Direction::V => j,
            Direction::Y => k,
        };
        let du = if n == 2 {
            if p == 0 {
                u[idx + stride] - u[idx]
            } else {
                u[idx] - u[idx - stride]
            }
        } else if p == 0 {
            0.5 * (-3.0 * u[idx] + 4.0 * u[idx + stride] - u[idx + 2 * stride])
        } else if p == n - 1 {
            0.5 * (3.0 * u[idx] - 4.0 * u[idx - stride] + u[idx - 2 * stride])
        } else {
            0.5 * (u[idx + stride] - u[idx - stride])
        };
        *d = du / (dx * axis.j1()[p]);
    }
    out
}

/// `(∂U/∂r, ∂U/∂v)` over the mesh, in the mesh's own coordinates.
pub fn extract_greeks(grid: &Grid3) -> (Grid3, Grid3) {
    (axis_derivative(grid, Direction::R), axis_derivative(grid, Direction::V))
}

/// Cell index and weight of `z` along `axis`, the weight being linear in the
/// physical coordinate.
fn locate(axis: &Axis, z: f64) -> Result<(usize, f64)> {
    let n = axis.len();
    if n == 1 {
        return Ok((0, 0.0));
    }
    let s = axis.physical_to_computational(z)? * (n - 1) as f64;
    let i = (s.floor() as usize).min(n - 2);
    let nodes = axis.z_nodes();
    let w = ((z - nodes[i]) / (nodes[i + 1] - nodes[i])).clamp(0.0, 1.0);
    Ok((i, w))
}

/// Trilinear interpolation in physical coordinates at the mesh point
/// `(r, v, y)`; collapsed axes ignore their coordinate.
pub fn interpolate_at(grid: &Grid3, r: f64, v: f64, y: f64) -> Result<f64> {
    let axes = grid.axes();
    let (i, wr) = locate(&axes.r, r)?;
    let (j, wv) = locate(&axes.v, v)?;
    let (k, wy) = locate(&axes.y, y)?;
    let (nr, nv, ny) = axes.dims();
    let mut acc = 0.0;
    for (di, a) in [(0, 1.0 - wr), (1, wr)] {
        if a == 0.0 || i + di >= nr {
            continue;
        }
        for (dj, b) in [(0, 1.0 - wv), (1, wv)] {
            if b == 0.0 || j + dj >= nv {
                continue;
            }
            for (dk, c) in [(0, 1.0 - wy), (1, wy)] {
                if c == 0.0 || k + dk >= ny {
                    continue;
                }
                acc += a * b * c * grid.get(i + di, j + dj, k + dk);
            }
        }
    }
    Ok(acc)
}
