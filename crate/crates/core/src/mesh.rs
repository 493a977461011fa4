//! Sinh-stretched coordinate axes.
//!
//! Each physical direction `z ∈ [z0, z∞]` is the image of the unit
//! computational interval under
//! `z(x) = K + α sinh(c2 x + c1 (1 - x))`, `c1 = asinh((z0 - K)/α)`,
//! `c2 = asinh((z∞ - K)/α)`, which packs nodes around `K`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one sinh metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    /// Concentration center `K`.
    pub center: f64,
    /// Stretching scale `α`; smaller values concentrate more nodes near `K`.
    pub alpha: f64,
    pub lower: f64,
    pub upper: f64,
}

impl MetricParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::InvalidMetric(format!(
                "bounds must satisfy z0 < z_inf, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidMetric(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.center >= self.lower && self.center <= self.upper) {
            return Err(Error::InvalidMetric(format!(
                "center {} outside [{}, {}]",
                self.center, self.lower, self.upper
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Map {
    Sinh { params: MetricParams, c1: f64, c2: f64 },
    Linear { lower: f64, upper: f64 },
    /// Collapsed direction holding a single node.
    Point(f64),
}

/// One coordinate direction: uniform computational nodes `x_i = i/(n-1)`,
/// their physical images and the analytic Jacobians `∂z/∂x`, `∂²z/∂x²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    map: Map,
    x: Vec<f64>,
    z: Vec<f64>,
    j1: Vec<f64>,
    j2: Vec<f64>,
}

/// Builds a sinh-stretched axis with `n ≥ 3` nodes.
pub fn build_axis(params: MetricParams, n: usize) -> Result<Axis> {
    params.validate()?;
    if n < 3 {
        return Err(Error::InvalidMetric(format!("need at least 3 nodes, got {n}")));
    }
    let c1 = ((params.lower - params.center) / params.alpha).asinh();
    let c2 = ((params.upper - params.center) / params.alpha).asinh();
    Ok(Axis::from_map(Map::Sinh { params, c1, c2 }, n))
}

/// Moves the upper bound so that an `n`-node axis has a node exactly at the
/// concentration center. The nearest node to the center is kept, so the
/// bound changes by a fraction of one cell.
pub fn snap_center_to_node(params: MetricParams, n: usize) -> Result<MetricParams> {
    params.validate()?;
    if n < 3 {
        return Err(Error::InvalidMetric(format!("need at least 3 nodes, got {n}")));
    }
    let c1 = ((params.lower - params.center) / params.alpha).asinh();
    let c2 = ((params.upper - params.center) / params.alpha).asinh();
    if c1 == 0.0 || c2 == 0.0 {
        return Ok(params);
    }
    let cells = (n - 1) as f64;
    let m = (-c1 / (c2 - c1) * cells).round().clamp(1.0, cells - 1.0);
    let x = m / cells;
    let c2 = c1 * (x - 1.0) / x;
    Ok(MetricParams {
        upper: params.center + params.alpha * c2.sinh(),
        ..params
    })
}

/// Metric parameters for the (r̃, v, ỹ) axes in rescaled units: rates span
/// `[0, 250]` with `α = 0.05`, variance spans `[0, 30]` with `α = 0.5`.
pub fn default_axes(strike: f64, v_center: f64) -> (MetricParams, MetricParams, MetricParams) {
    (
        MetricParams {
            center: strike,
            alpha: 0.05,
            lower: 0.0,
            upper: 250.0,
        },
        MetricParams {
            center: v_center,
            alpha: 0.5,
            lower: 0.0,
            upper: 30.0,
        },
        MetricParams {
            center: 0.0,
            alpha: 0.05,
            lower: 0.0,
            upper: 250.0,
        },
    )
}

impl Axis {
    /// Uniform axis on `[lower, upper]` (constant Jacobian, zero second Jacobian).
    pub fn uniform(lower: f64, upper: f64, n: usize) -> Result<Axis> {
        if !(lower < upper) || n < 3 {
            return Err(Error::InvalidMetric(format!(
                "uniform axis needs lower < upper and n >= 3 (got [{lower}, {upper}], n = {n})"
            )));
        }
        Ok(Axis::from_map(Map::Linear { lower, upper }, n))
    }

    /// Single-node axis for a direction the solution does not depend on.
    pub fn point(value: f64) -> Axis {
        Axis {
            map: Map::Point(value),
            x: vec![0.0],
            z: vec![value],
            j1: vec![1.0],
            j2: vec![0.0],
        }
    }

    fn from_map(map: Map, n: usize) -> Axis {
        let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut z = Vec::with_capacity(n);
        let mut j1 = Vec::with_capacity(n);
        let mut j2 = Vec::with_capacity(n);
        for &xi in &x {
            let (zi, d1, d2) = eval_map(&map, xi);
            z.push(zi);
            j1.push(d1);
            j2.push(d2);
        }
        // endpoint identities hold exactly, not just to rounding
        let (lo, hi) = match map {
            Map::Sinh { params, .. } => (params.lower, params.upper),
            Map::Linear { lower, upper } => (lower, upper),
            Map::Point(v) => (v, v),
        };
        z[0] = lo;
        z[n - 1] = hi;
        Axis { map, x, z, j1, j2 }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// True for a single-node axis.
    pub fn is_collapsed(&self) -> bool {
        self.z.len() == 1
    }

    /// Computational spacing `1/(n-1)`; 1 for a collapsed axis.
    pub fn dx(&self) -> f64 {
        if self.is_collapsed() {
            1.0
        } else {
            1.0 / (self.len() - 1) as f64
        }
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn z_nodes(&self) -> &[f64] {
        &self.z
    }

    pub fn j1(&self) -> &[f64] {
        &self.j1
    }

    pub fn j2(&self) -> &[f64] {
        &self.j2
    }

    pub fn lower(&self) -> f64 {
        self.z[0]
    }

    pub fn upper(&self) -> f64 {
        *self.z.last().unwrap()
    }

    pub fn metric(&self) -> Option<MetricParams> {
        match self.map {
            Map::Sinh { params, .. } => Some(params),
            _ => None,
        }
    }

    /// Forward map `x ↦ z` at an arbitrary computational coordinate.
    pub fn computational_to_physical(&self, x: f64) -> f64 {
        eval_map(&self.map, x).0
    }

    /// Inverse map `z ↦ x ∈ [0, 1]`.
    pub fn physical_to_computational(&self, z: f64) -> Result<f64> {
        let (lo, hi) = (self.lower(), self.upper());
        let tol = 1e-12 * (hi.abs().max(lo.abs()).max(1.0));
        if !(z >= lo - tol && z <= hi + tol) {
            return Err(Error::OutOfRange {
                value: z,
                lower: lo,
                upper: hi,
            });
        }
        let x = match self.map {
            Map::Sinh { params, c1, c2 } => {
                (((z - params.center) / params.alpha).asinh() - c1) / (c2 - c1)
            }
            Map::Linear { lower, upper } => (z - lower) / (upper - lower),
            Map::Point(_) => 0.0,
        };
        Ok(x.clamp(0.0, 1.0))
    }

    /// Writes `i,x,z,j1,j2` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "i,x,z,j1,j2")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{:.17e},{:.17e},{:.17e},{:.17e}",
                i, self.x[i], self.z[i], self.j1[i], self.j2[i]
            )?;
        }
        Ok(())
    }
}

fn eval_map(map: &Map, x: f64) -> (f64, f64, f64) {
    match *map {
        Map::Sinh { params, c1, c2 } => {
            let arg = c2 * x + c1 * (1.0 - x);
            let span = c2 - c1;
            (
                params.center + params.alpha * arg.sinh(),
                params.alpha * arg.cosh() * span,
                params.alpha * arg.sinh() * span * span,
            )
        }
        Map::Linear { lower, upper } => (lower + (upper - lower) * x, upper - lower, 0.0),
        Map::Point(v) => (v, 1.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r_params() -> MetricParams {
        MetricParams {
            center: 1.0,
            alpha: 0.05,
            lower: 0.0,
            upper: 250.0,
        }
    }

    #[test]
    fn snapped_axis_has_node_at_center() {
        for (center, n) in [(2.88, 100), (3.92, 100), (3.92, 37), (0.7, 200)] {
            let p = MetricParams { center, alpha: 0.5, lower: 0.0, upper: 25.0 };
            let snapped = snap_center_to_node(p, n).unwrap();
            assert!((snapped.upper - 25.0).abs() < 25.0 * 0.1);
            let axis = build_axis(snapped, n).unwrap();
            let hit = axis.z_nodes().iter().map(|z| (z - center).abs()).fold(f64::INFINITY, f64::min);
            assert!(hit < 1e-12, "center {center} n {n}: nearest node {hit}");
        }
        let at_lower = MetricParams { center: 0.0, alpha: 0.5, lower: 0.0, upper: 25.0 };
        assert_eq!(snap_center_to_node(at_lower, 50).unwrap(), at_lower);
    }

    #[test]
    fn endpoints_and_monotonicity() {
        let a = build_axis(r_params(), 101).unwrap();
        assert_eq!(a.z_nodes()[0], 0.0);
        assert_eq!(a.upper(), 250.0);
        assert!((a.computational_to_physical(0.0) - 0.0).abs() < 1e-10);
        assert!((a.computational_to_physical(1.0) - 250.0).abs() < 1e-10 * 250.0);
        assert!(a.z_nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(a.j1().iter().all(|j| *j > 0.0));
    }

    #[test]
    fn zero_center_at_lower_bound_gives_zero_c1() {
        let a = build_axis(
            MetricParams {
                center: 0.0,
                alpha: 0.3,
                lower: 0.0,
                upper: 10.0,
            },
            11,
        )
        .unwrap();
        match a.map {
            Map::Sinh { c1, .. } => assert_eq!(c1, 0.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn jacobian_near_unity_at_center() {
        let a = build_axis(r_params(), 100).unwrap();
        let i = a
            .z_nodes()
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 - 1.0).abs().total_cmp(&(y.1 - 1.0).abs()))
            .unwrap()
            .0;
        let j = a.j1()[i];
        assert!((0.5..2.0).contains(&j), "j1 = {j}");
    }

    #[test]
    fn default_axes_values() {
        let (r, v, y) = default_axes(1.0, 0.5);
        assert_eq!((r.center, r.alpha, r.lower, r.upper), (1.0, 0.05, 0.0, 250.0));
        assert_eq!((y.center, y.alpha, y.lower, y.upper), (0.0, 0.05, 0.0, 250.0));
        assert_eq!((v.center, v.alpha, v.lower, v.upper), (0.5, 0.5, 0.0, 30.0));
        let (_, _, y2) = default_axes(3.7, 0.5);
        assert_eq!(y2, y);
    }

    #[test]
    fn invalid_params() {
        let mut p = r_params();
        p.upper = -1.0;
        assert!(matches!(build_axis(p, 10), Err(Error::InvalidMetric(_))));
        let mut p = r_params();
        p.alpha = 0.0;
        assert!(build_axis(p, 10).is_err());
        assert!(build_axis(r_params(), 2).is_err());
    }

    #[test]
    fn inverse_map_examples() {
        let a = build_axis(r_params(), 51).unwrap();
        assert_eq!(a.physical_to_computational(0.0).unwrap(), 0.0);
        assert_eq!(a.physical_to_computational(250.0).unwrap(), 1.0);
        let xk = a.physical_to_computational(1.0).unwrap();
        assert!((a.computational_to_physical(xk) - 1.0).abs() < 1e-10);
        assert!(matches!(a.physical_to_computational(251.0), Err(Error::OutOfRange { .. })));
        assert!(a.physical_to_computational(-0.1).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences_second_order() {
        // mismatch between analytic j1 and centered differences of the node
        // table at a fixed physical location, for n and 2n - 1 nodes
        let p = MetricParams {
            center: 3.0,
            alpha: 0.5,
            lower: 0.0,
            upper: 30.0,
        };
        let mismatch = |n: usize| {
            let a = build_axis(p, n).unwrap();
            let h = a.dx();
            let i = (n - 1) / 2;
            let fd = (a.z_nodes()[i + 1] - a.z_nodes()[i - 1]) / (2.0 * h);
            (fd - a.j1()[i]).abs()
        };
        let e1 = mismatch(41);
        let e2 = mismatch(81);
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn nodes_denser_near_center() {
        for alpha in [0.02, 0.05, 0.1] {
            let p = MetricParams {
                center: 4.0,
                alpha,
                lower: 0.0,
                upper: 250.0,
            };
            let a = build_axis(p, 100).unwrap();
            let z = a.z_nodes();
            let k = z
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 - 4.0).abs().total_cmp(&(y.1 - 4.0).abs()))
                .unwrap()
                .0;
            let n = z.len();
            assert!(z[k + 1] - z[k] < z[n - 1] - z[n - 2]);
        }
    }

    #[test]
    fn csv_dump_has_all_rows() {
        let a = build_axis(r_params(), 5).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 6);
        assert!(s.starts_with("i,x,z,j1,j2"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip(u in 0.0f64..=1.0, which in 0usize..3) {
            let (r, v, y) = default_axes(3.9, 0.5);
            let p = [r, v, y][which];
            let a = build_axis(p, 40).unwrap();
            let z = p.lower + u * (p.upper - p.lower);
            let x = a.physical_to_computational(z).unwrap();
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert!((a.computational_to_physical(x) - z).abs() < 1e-10 * p.upper);
        }
    }
}
