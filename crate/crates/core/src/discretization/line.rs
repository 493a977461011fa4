use std::io::{self, Write};

use super::{metric_coefficients, Axes, BoundarySpec, Direction, Grid3, MetricCoefficients, OneSided, PdeModel};
use crate::error::Result;
use crate::solver::thomas_first_row;

/// Coefficients of the one-dimensional operator `L_d` at one node, on the
/// neighbours `(p-1, p, p+1)`; `far` couples a lower-face node to `p+2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stencil {
    pub lower: f64,
    pub diag: f64,
    pub upper: f64,
    pub far: f64,
}

/// Row of `L_d` at position `p` of a line of length `n` with computational
/// spacing `dx`.
///
/// `L_r = g1 δ_xx + g4 δ_x`, `L_v = g2 δ_xx + g5 δ_x` and
/// `L_y = g6 δ_x - c`, where `c` is the reaction coefficient. On a degenerate
/// lower face the second derivative is dropped and `δ_x` is one-sided.
#[inline]
pub fn operator_row(
    dir: Direction,
    p: usize,
    n: usize,
    coeffs: &MetricCoefficients,
    dx: f64,
    lower_face: Option<OneSided>,
) -> Stencil {
    let g = &coeffs.g;
    let (diffusion, convection, reaction) = match dir {
        Direction::R => (g[0], g[3], 0.0),
        Direction::V => (g[1], g[4], 0.0),
        Direction::Y => (0.0, g[5], -coeffs.reaction),
    };
    if n == 1 {
        return Stencil {
            diag: reaction,
            ..Stencil::default()
        };
    }
    if p > 0 && p < n - 1 {
        let d2 = diffusion / (dx * dx);
        let d1 = convection / (2.0 * dx);
        return Stencil {
            lower: d2 - d1,
            diag: -2.0 * d2 + reaction,
            upper: d2 + d1,
            far: 0.0,
        };
    }
    if p == 0 {
        return match lower_face {
            Some(OneSided::First) => Stencil {
                lower: 0.0,
                diag: -convection / dx + reaction,
                upper: convection / dx,
                far: 0.0,
            },
            Some(OneSided::Second) => Stencil {
                lower: 0.0,
                diag: -1.5 * convection / dx + reaction,
                upper: 2.0 * convection / dx,
                far: -0.5 * convection / dx,
            },
            None => Stencil::default(),
        };
    }
    // upper faces are always Dirichlet
    Stencil::default()
}

/// Rows of `I - θΔt L_d` along one line.
///
/// The lower and upper entries of the first and last rows are unused and
/// kept at zero. `far` is the `(0, 2)` entry produced by a second-order
/// one-sided face.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriDiagLine {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub far: f64,
}

impl TriDiagLine {
    pub fn identity(n: usize) -> Self {
        TriDiagLine {
            lower: vec![0.0; n],
            diag: vec![1.0; n],
            upper: vec![0.0; n],
            far: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn reset(&mut self, n: usize) {
        self.lower.clear();
        self.diag.clear();
        self.upper.clear();
        self.lower.resize(n, 0.0);
        self.diag.resize(n, 1.0);
        self.upper.resize(n, 0.0);
        self.far = 0.0;
    }

    /// Solves `A x = rhs` in place.
    ///
    /// A nonzero `far` entry is eliminated against row 1 before the sweep,
    /// which keeps the system tridiagonal without lagging any unknown. When
    /// row 1 has no upper entry to eliminate with (an identity row), the far
    /// coupling is moved to the right-hand side using the incoming value at
    /// position 2.
    pub fn solve(&self, rhs: &mut [f64]) -> Result<()> {
        let n = rhs.len();
        let mut scratch = vec![0.0; n];
        if n == 0 {
            return Ok(());
        }
        let (mut d0, mut u0) = (self.diag[0], self.upper[0]);
        if self.far != 0.0 && n > 2 {
            if self.upper[1] != 0.0 {
                let m = self.far / self.upper[1];
                d0 -= m * self.lower[1];
                u0 -= m * self.diag[1];
                rhs[0] -= m * rhs[1];
            } else {
                rhs[0] -= self.far * rhs[2];
            }
        }
        thomas_first_row(d0, u0, &self.lower, &self.diag, &self.upper, rhs, &mut scratch)
    }

    /// `A x` for the tridiagonal part (the `far` entry included).
    pub fn multiply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                if i == 0 && n > 2 {
                    s += self.far * x[2];
                }
                s
            })
            .collect()
    }

    /// Writes `p,lower,diag,upper,rhs` rows.
    pub fn write_csv<W: Write>(&self, mut w: W, rhs: &[f64]) -> io::Result<()> {
        writeln!(w, "p,lower,diag,upper,rhs")?;
        for p in 0..self.len() {
            writeln!(
                w,
                "{},{:.17e},{:.17e},{:.17e},{:.17e}",
                p,
                self.lower[p],
                self.diag[p],
                self.upper[p],
                rhs.get(p).copied().unwrap_or(0.0)
            )?;
        }
        if self.far != 0.0 {
            writeln!(w, "# far(0,2) = {:.17e}", self.far)?;
        }
        Ok(())
    }
}

/// Fills `out` with `I - θΔt L_d` for the line `(a, b)` along `dir`, taking
/// node coefficients from `coeff(i, j, k)`.
pub(crate) fn assemble_into<F>(
    out: &mut TriDiagLine,
    dir: Direction,
    a: usize,
    b: usize,
    axes: &Axes,
    boundary: &BoundarySpec,
    theta_dt: f64,
    coeff: F,
) where
    F: Fn(usize, usize, usize) -> MetricCoefficients,
{
    let axis = axes.axis(dir);
    let n = axis.len();
    let dx = axis.dx();
    let face = boundary.lower_one_sided(dir);
    out.reset(n);
    for p in 0..n {
        let (i, j, k) = match dir {
            Direction::R => (p, a, b),
            Direction::V => (a, p, b),
            Direction::Y => (a, b, p),
        };
        if boundary.is_dirichlet(axes, i, j, k) {
            continue;
        }
        let s = operator_row(dir, p, n, &coeff(i, j, k), dx, face);
        if p > 0 {
            out.lower[p] = -theta_dt * s.lower;
        }
        out.diag[p] = 1.0 - theta_dt * s.diag;
        if p + 1 < n {
            out.upper[p] = -theta_dt * s.upper;
        }
        if p == 0 {
            out.far = -theta_dt * s.far;
        }
    }
}

/// Assembles `I - θΔt L_d(t)` for the line `(a, b)` along `dir`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_line(
    dir: Direction,
    t: f64,
    a: usize,
    b: usize,
    axes: &Axes,
    model: &dyn PdeModel,
    boundary: &BoundarySpec,
    theta_dt: f64,
) -> TriDiagLine {
    let mut line = TriDiagLine::default();
    assemble_into(&mut line, dir, a, b, axes, boundary, theta_dt, |i, j, k| {
        metric_coefficients(model, t, axes, i, j, k)
    });
    line
}

/// `I - θΔt L_r` along r at fixed `(v_j, y_k)`.
pub fn assemble_line_r(
    t: f64,
    j: usize,
    k: usize,
    axes: &Axes,
    model: &dyn PdeModel,
    boundary: &BoundarySpec,
    theta_dt: f64,
) -> TriDiagLine {
    assemble_line(Direction::R, t, j, k, axes, model, boundary, theta_dt)
}

/// `I - θΔt L_v` along v at fixed `(r_i, y_k)`.
pub fn assemble_line_v(
    t: f64,
    i: usize,
    k: usize,
    axes: &Axes,
    model: &dyn PdeModel,
    boundary: &BoundarySpec,
    theta_dt: f64,
) -> TriDiagLine {
    assemble_line(Direction::V, t, i, k, axes, model, boundary, theta_dt)
}

/// `I - θΔt L_y` along y at fixed `(r_i, v_j)`; carries the reaction term.
pub fn assemble_line_y(
    t: f64,
    i: usize,
    j: usize,
    axes: &Axes,
    model: &dyn PdeModel,
    boundary: &BoundarySpec,
    theta_dt: f64,
) -> TriDiagLine {
    assemble_line(Direction::Y, t, i, j, axes, model, boundary, theta_dt)
}

/// Applies the stencil `s` at storage index `idx` (position `p` on a line of
/// length `n` with storage stride `stride`).
#[inline]
pub(crate) fn apply_stencil(s: &Stencil, u: &[f64], idx: usize, p: usize, n: usize, stride: usize) -> f64 {
    let mut acc = s.diag * u[idx];
    if p > 0 {
        acc += s.lower * u[idx - stride];
    }
    if p + 1 < n {
        acc += s.upper * u[idx + stride];
    }
    if s.far != 0.0 && p + 2 < n {
        acc += s.far * u[idx + 2 * stride];
    }
    acc
}

/// `L_d U` at every node at time `t`; zero on Dirichlet nodes.
pub fn apply_operator(
    dir: Direction,
    grid: &Grid3,
    t: f64,
    model: &dyn PdeModel,
    boundary: &BoundarySpec,
) -> Vec<f64> {
    let axes = grid.axes();
    let (nr, nv, ny) = axes.dims();
    let n = axes.axis(dir).len();
    let dx = axes.axis(dir).dx();
    let stride = axes.stride(dir);
    let face = boundary.lower_one_sided(dir);
    let u = grid.data();
    let mut out = vec![0.0; u.len()];
    for i in 0..nr {
        for j in 0..nv {
            for k in 0..ny {
                if boundary.is_dirichlet(axes, i, j, k) {
                    continue;
                }
                let idx = axes.index(i, j, k);
                let p = match dir {
                    Direction::R => i,
                    Direction::V => j,
                    Direction::Y => k,
                };
                let c = metric_coefficients(model, t, axes, i, j, k);
                let s = operator_row(dir, p, n, &c, dx, face);
                out[idx] = apply_stencil(&s, u, idx, p, n, stride);
            }
        }
    }
    out
}
