use crate::discretization::line::{apply_stencil, assemble_into};
use crate::discretization::{
    metric_coefficients, mixed_at, operator_row, Axes, BoundarySpec, Direction, Grid3, MetricCoefficients,
    PdeModel, TriDiagLine,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_indices, try_for_each_chunk_mut, Execution};

/// Time level at which the explicit predictor evaluates the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplicitTime {
    /// Start of the step. First order in time once coefficients move with `t`.
    Start,
    /// Half step, the same level as the implicit factors.
    #[default]
    Midpoint,
}

/// What one backward step needs besides the grid itself.
#[derive(Clone, Copy)]
pub struct StepContext<'a> {
    pub model: &'a dyn PdeModel,
    pub boundary: &'a BoundarySpec,
    pub theta: f64,
    pub explicit_time: ExplicitTime,
    pub scheme: AdiScheme,
    pub execution: Execution,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub max_delta: f64,
    pub max_abs: f64,
}

const ZERO: MetricCoefficients = MetricCoefficients {
    g: [0.0; 6],
    reaction: 0.0,
};

/// ADI splitting used for one backward step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdiScheme {
    /// Explicit predictor followed by one implicit correction per direction.
    Douglas,
    /// Douglas followed by a second predictor-corrector stage that re-applies
    /// the explicit operator to the first-stage increment. Keeps second order
    /// in time when the mixed derivative is present; needs `theta ≥ 1/3`.
    #[default]
    ModifiedCraigSneyd,
}

/// One ADI step from calendar time `grid.time()` back to `grid.time() - dt`.
///
/// The explicit predictor uses the full operator (mixed term included) at the
/// level chosen by `ctx.explicit_time`; the implicit corrections use the
/// directional operators at the half step. Dirichlet nodes are set to their
/// prescribed values at the new time.
pub fn douglas_step(grid: &mut Grid3, dt: f64, ctx: &StepContext<'_>) -> Result<StepStats> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    let axes = grid.axes().clone();
    let t_now = grid.time();
    let t_mid = t_now - 0.5 * dt;
    let t_new = t_now - dt;
    let t_explicit = match ctx.explicit_time {
        ExplicitTime::Start => t_now,
        ExplicitTime::Midpoint => t_mid,
    };
    let (_, nv, ny) = axes.dims();
    let plane = nv * ny;

    let mut delta = vec![0.0; axes.len()];
    {
        let u = grid.data();
        let axes = &*axes;
        try_for_each_chunk_mut(ctx.execution, &mut delta, plane, |i, out| {
            for j in 0..nv {
                for k in 0..ny {
                    let local = j * ny + k;
                    let idx = i * plane + local;
                    if let Some(g) = ctx.boundary.dirichlet_at(axes, i, j, k) {
                        let (r, v, y) = axes.coords(i, j, k);
                        out[local] = g(t_new, r, v, y) - u[idx];
                        continue;
                    }
                    let (full, _) = explicit_operator(u, axes, ctx, t_explicit, i, j, k);
                    out[local] = dt * (full + source_at(axes, ctx, t_mid, i, j, k));
                }
            }
            Ok::<(), Error>(())
        })?;
    }

    let field = coefficient_field(&axes, ctx, t_mid);
    let theta_dt = ctx.theta * dt;
    // Without a mixed term the second stage only re-solves the same
    // increment when theta = 1/2.
    let has_mixed = axes.r.len() > 1 && axes.v.len() > 1;
    let predicted = match ctx.scheme {
        AdiScheme::ModifiedCraigSneyd if has_mixed || ctx.theta != 0.5 => Some(delta.clone()),
        _ => None,
    };
    implicit_sweeps(&mut delta, &field, &axes, ctx, theta_dt)?;

    if let Some(mut second) = predicted {
        let first = &delta;
        let axes_ref = &*axes;
        let (w_mixed, w_full) = (theta_dt, (0.5 - ctx.theta) * dt);
        try_for_each_chunk_mut(ctx.execution, &mut second, plane, |i, out| {
            for j in 0..nv {
                for k in 0..ny {
                    if ctx.boundary.is_dirichlet(axes_ref, i, j, k) {
                        continue;
                    }
                    let (full, mixed) = explicit_operator(first, axes_ref, ctx, t_explicit, i, j, k);
                    out[j * ny + k] += w_mixed * mixed + w_full * full;
                }
            }
            Ok::<(), Error>(())
        })?;
        implicit_sweeps(&mut second, &field, &axes, ctx, theta_dt)?;
        delta = second;
    }

    let mut max_delta = 0.0f64;
    let mut max_abs = 0.0f64;
    let mut finite = true;
    let u = grid.data_mut();
    for (idx, (x, d)) in u.iter_mut().zip(&delta).enumerate() {
        let (i, j, k) = axes.unravel(idx);
        *x = match ctx.boundary.dirichlet_at(&axes, i, j, k) {
            Some(g) => {
                let (r, v, y) = axes.coords(i, j, k);
                g(t_new, r, v, y)
            }
            None => *x + d,
        };
        finite &= x.is_finite();
        max_delta = max_delta.max(d.abs());
        max_abs = max_abs.max(x.abs());
    }
    grid.set_time(t_new);
    if !finite {
        return Err(Error::NonFinite { step: 0 });
    }
    Ok(StepStats { max_delta, max_abs })
}

fn implicit_sweeps(
    delta: &mut [f64],
    field: &[MetricCoefficients],
    axes: &Axes,
    ctx: &StepContext<'_>,
    theta_dt: f64,
) -> Result<()> {
    if axes.r.len() > 1 {
        sweep_r(delta, field, axes, ctx, theta_dt)?;
    }
    if axes.v.len() > 1 {
        sweep_v(delta, field, axes, ctx, theta_dt)?;
    }
    sweep_y(delta, field, axes, ctx, theta_dt)
}

/// `((L_r + L_v + L_y + L_rv) U, L_rv U)` at an interior node.
#[inline]
fn explicit_operator(
    u: &[f64],
    axes: &Axes,
    ctx: &StepContext<'_>,
    t: f64,
    i: usize,
    j: usize,
    k: usize,
) -> (f64, f64) {
    let c = metric_coefficients(ctx.model, t, axes, i, j, k);
    let idx = axes.index(i, j, k);
    let mut acc = 0.0;
    for (dir, p) in [(Direction::R, i), (Direction::V, j), (Direction::Y, k)] {
        let axis = axes.axis(dir);
        let n = axis.len();
        let s = operator_row(dir, p, n, &c, axis.dx(), ctx.boundary.lower_one_sided(dir));
        acc += apply_stencil(&s, u, idx, p, n, axes.stride(dir));
    }
    let mixed = mixed_at(u, axes, i, j, k, c.g[2]);
    (acc + mixed, mixed)
}

#[inline]
fn source_at(axes: &Axes, ctx: &StepContext<'_>, t: f64, i: usize, j: usize, k: usize) -> f64 {
    if !ctx.model.has_source() {
        return 0.0;
    }
    let (r, v, y) = axes.coords(i, j, k);
    ctx.model.source(t, r, v, y)
}

fn coefficient_field(axes: &Axes, ctx: &StepContext<'_>, t: f64) -> Vec<MetricCoefficients> {
    let (_, nv, ny) = axes.dims();
    let mut field = vec![ZERO; axes.len()];
    let _ = try_for_each_chunk_mut(ctx.execution, &mut field, nv * ny, |i, out| {
        for j in 0..nv {
            for k in 0..ny {
                if !ctx.boundary.is_dirichlet(axes, i, j, k) {
                    out[j * ny + k] = metric_coefficients(ctx.model, t, axes, i, j, k);
                }
            }
        }
        Ok::<(), ()>(())
    });
    field
}

fn sweep_r(
    delta: &mut [f64],
    field: &[MetricCoefficients],
    axes: &Axes,
    ctx: &StepContext<'_>,
    theta_dt: f64,
) -> Result<()> {
    let (nr, nv, ny) = axes.dims();
    let plane = nv * ny;
    let src: &[f64] = delta;
    let solved: Vec<Result<Vec<f64>>> = map_indices(ctx.execution, plane, |l| {
        let (j, k) = (l / ny, l % ny);
        let mut rhs: Vec<f64> = (0..nr).map(|i| src[i * plane + l]).collect();
        let mut line = TriDiagLine::default();
        assemble_into(&mut line, Direction::R, j, k, axes, ctx.boundary, theta_dt, |i, j, k| {
            field[axes.index(i, j, k)]
        });
        line.solve(&mut rhs)?;
        Ok(rhs)
    });
    for (l, col) in solved.into_iter().enumerate() {
        for (i, x) in col?.into_iter().enumerate() {
            delta[i * plane + l] = x;
        }
    }
    Ok(())
}

fn sweep_v(
    delta: &mut [f64],
    field: &[MetricCoefficients],
    axes: &Axes,
    ctx: &StepContext<'_>,
    theta_dt: f64,
) -> Result<()> {
    let (_, nv, ny) = axes.dims();
    try_for_each_chunk_mut(ctx.execution, delta, nv * ny, |i, plane| {
        let mut line = TriDiagLine::default();
        let mut rhs = vec![0.0; nv];
        for k in 0..ny {
            for (j, x) in rhs.iter_mut().enumerate() {
                *x = plane[j * ny + k];
            }
            assemble_into(&mut line, Direction::V, i, k, axes, ctx.boundary, theta_dt, |i, j, k| {
                field[axes.index(i, j, k)]
            });
            line.solve(&mut rhs)?;
            for (j, x) in rhs.iter().enumerate() {
                plane[j * ny + k] = *x;
            }
        }
        Ok(())
    })
}

fn sweep_y(
    delta: &mut [f64],
    field: &[MetricCoefficients],
    axes: &Axes,
    ctx: &StepContext<'_>,
    theta_dt: f64,
) -> Result<()> {
    let (_, nv, ny) = axes.dims();
    try_for_each_chunk_mut(ctx.execution, delta, nv * ny, |i, plane| {
        let mut line = TriDiagLine::default();
        for (j, rhs) in plane.chunks_mut(ny).enumerate() {
            assemble_into(&mut line, Direction::Y, i, j, axes, ctx.boundary, theta_dt, |i, j, k| {
                field[axes.index(i, j, k)]
            });
            line.solve(rhs)?;
        }
        Ok(())
    })
}
