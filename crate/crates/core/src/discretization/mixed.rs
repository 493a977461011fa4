use super::{metric_coefficients, Axes, BoundarySpec, Grid3, PdeModel};

/// Centred cross difference `g3 δ_rv u` at `(i, j, k)`. Zero unless both `i`
/// and `j` are interior.
#[inline]
pub fn mixed_at(u: &[f64], axes: &Axes, i: usize, j: usize, k: usize, g3: f64) -> f64 {
    let (nr, nv, _) = axes.dims();
    if i == 0 || j == 0 || i + 1 >= nr || j + 1 >= nv || g3 == 0.0 {
        return 0.0;
    }
    let sr = axes.stride(super::Direction::R);
    let sv = axes.stride(super::Direction::V);
    let c = axes.index(i, j, k);
    let cross = u[c + sr + sv] - u[c + sr - sv] - u[c - sr + sv] + u[c - sr - sv];
    g3 * cross / (4.0 * axes.r.dx() * axes.v.dx())
}

/// Mixed-derivative term at every node at time `t`; zero on Dirichlet nodes.
pub fn apply_mixed(grid: &Grid3, t: f64, model: &dyn PdeModel, boundary: &BoundarySpec) -> Vec<f64> {
    let axes = grid.axes();
    let (nr, nv, ny) = axes.dims();
    let u = grid.data();
    let mut out = vec![0.0; u.len()];
    for i in 1..nr.saturating_sub(1) {
        for j in 1..nv.saturating_sub(1) {
            for k in 0..ny {
                if boundary.is_dirichlet(axes, i, j, k) {
                    continue;
                }
                let g3 = metric_coefficients(model, t, axes, i, j, k).g[2];
                out[axes.index(i, j, k)] = mixed_at(u, axes, i, j, k, g3);
            }
        }
    }
    out
}
