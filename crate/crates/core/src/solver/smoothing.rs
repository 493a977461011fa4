use std::sync::Arc;

use crate::discretization::{Axes, Grid3};
use crate::mesh::Axis;
use crate::par::{for_each_chunk_mut, Execution};

/// Midpoint sample abscissae of the cell around node `i`, or `None` when the
/// node is an end of a non-collapsed axis.
fn cell_samples(axis: &Axis, i: usize, m: usize) -> Option<Vec<f64>> {
    let z = axis.z_nodes();
    let n = z.len();
    if n == 1 {
        return Some(vec![z[0]]);
    }
    if i == 0 || i == n - 1 {
        return None;
    }
    let a = z[i] - 0.5 * (z[i] - z[i - 1]);
    let b = z[i] + 0.5 * (z[i + 1] - z[i]);
    let h = (b - a) / m as f64;
    Some((0..m).map(|q| a + (q as f64 + 0.5) * h).collect())
}

/// Terminal field of cell averages of `payoff(r, v, y)`.
///
/// Interior nodes hold the average over the cell bounded by the midpoints to
/// their neighbours, computed with an `m`-point midpoint rule per dimension.
/// Nodes on any face keep the pointwise value.
pub fn smooth_terminal<F>(axes: Arc<Axes>, time: f64, payoff: F, m: usize, exec: Execution) -> Grid3
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    let m = m.max(1);
    let (_, nv, ny) = axes.dims();
    let rs: Vec<_> = (0..axes.r.len()).map(|i| cell_samples(&axes.r, i, m)).collect();
    let vs: Vec<_> = (0..nv).map(|j| cell_samples(&axes.v, j, m)).collect();
    let ys: Vec<_> = (0..ny).map(|k| cell_samples(&axes.y, k, m)).collect();
    let mut data = vec![0.0; axes.len()];
    let ax = &*axes;
    for_each_chunk_mut(exec, &mut data, nv * ny, |i, plane| {
        for j in 0..nv {
            for k in 0..ny {
                plane[j * ny + k] = match (&rs[i], &vs[j], &ys[k]) {
                    (Some(r), Some(v), Some(y)) => {
                        let mut sum = 0.0;
                        for &ri in r {
                            for &vj in v {
                                for &yk in y {
                                    sum += payoff(ri, vj, yk);
                                }
                            }
                        }
                        sum / (r.len() * v.len() * y.len()) as f64
                    }
                    _ => {
                        let (r, v, y) = ax.coords(i, j, k);
                        payoff(r, v, y)
                    }
                };
            }
        }
    });
    Grid3::from_data(axes, data, time).expect("length matches axes")
}

/// Pointwise sampling of `payoff` on the mesh.
pub fn sample_terminal<F>(axes: Arc<Axes>, time: f64, payoff: F) -> Grid3
where
    F: Fn(f64, f64, f64) -> f64,
{
    Grid3::from_fn(axes, time, payoff)
}
