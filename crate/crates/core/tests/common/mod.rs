//! Measurements shared by the acceptance report and the property tests.
//!
//! Every function returns the raw numbers; thresholds live with the callers.

#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hjm_sv::discretization::{
    apply_mixed, apply_operator, Axes, BoundarySpec, Direction, FaceRule, Grid3, InstrumentKind, PdeModel,
};
use hjm_sv::instruments::{default_spot, interpolate_at, price_caplet, price_caplet_ladder, price_zcb, MeshConfig};
use hjm_sv::mc::{simulate_caplet, simulate_zcb, McConfig, McEstimate};
use hjm_sv::mesh::{build_axis, Axis, MetricParams};
use hjm_sv::model::{CapletSpec, InitialCurve, ModelParams};
use hjm_sv::solver::{run, thomas_solve, Problem, SolverConfig};
use hjm_sv::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MATURITY: f64 = 20.0;

pub fn flat() -> InitialCurve {
    InitialCurve::flat(1.04).unwrap()
}

pub fn quoted() -> InitialCurve {
    InitialCurve::from_file(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/quotes.txt")).unwrap()
}

pub fn params() -> ModelParams {
    ModelParams::reference()
}

pub fn reference_caplet(strike: f64) -> CapletSpec {
    CapletSpec::new(1.0, 2.0, strike).unwrap()
}

pub fn solver(steps_per_year: usize) -> SolverConfig {
    SolverConfig {
        steps_per_year,
        ..SolverConfig::default()
    }
}

pub fn zcb_mesh(nr: usize, ny: usize) -> MeshConfig {
    let mut m = MeshConfig::zcb_reference();
    m.r.nodes = nr;
    m.y.nodes = ny;
    m
}

pub fn caplet_mesh(nr: usize, nv: usize, ny: usize) -> MeshConfig {
    let mut m = MeshConfig::caplet_reference();
    (m.r.nodes, m.v.nodes, m.y.nodes) = (nr, nv, ny);
    m
}

pub struct BondRun {
    pub price: f64,
    pub closed_form: f64,
    pub wall_time: Duration,
}

impl BondRun {
    pub fn error(&self) -> f64 {
        self.price - self.closed_form
    }
}

pub fn bond(curve: &InitialCurve, nr: usize, ny: usize, steps_per_year: usize) -> BondRun {
    let res = price_zcb(
        MATURITY,
        curve,
        &params(),
        &zcb_mesh(nr, ny),
        &solver(steps_per_year),
        default_spot(curve),
    )
    .unwrap();
    BondRun {
        price: res.price,
        closed_form: res.closed_form.unwrap(),
        wall_time: res.wall_time(),
    }
}

pub fn caplet_price(strike: f64, mesh: &MeshConfig, solver: &SolverConfig) -> (f64, Duration) {
    let curve = flat();
    let res = price_caplet(&reference_caplet(strike), &curve, &params(), mesh, solver, default_spot(&curve)).unwrap();
    (res.price, res.wall_time())
}

/// Premium changes when each axis of the 100×40×40 mesh is doubled.
pub struct MeshDeltas {
    pub base: f64,
    pub r: f64,
    pub v: f64,
    pub y: f64,
}

pub fn caplet_mesh_deltas(strike: f64) -> MeshDeltas {
    let s = solver(12);
    let p = |nr, nv, ny| caplet_price(strike, &caplet_mesh(nr, nv, ny), &s).0;
    let base = p(100, 40, 40);
    MeshDeltas {
        base,
        r: p(200, 40, 40) - base,
        v: p(100, 80, 40) - base,
        y: p(100, 40, 80) - base,
    }
}

pub fn caplet_mc(strike: f64, n_paths: usize, steps_per_year: usize) -> McEstimate {
    let cfg = McConfig {
        n_paths,
        steps_per_year,
        ..McConfig::default()
    };
    simulate_caplet(&reference_caplet(strike), &flat(), &params(), &cfg).unwrap()
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Worst Thomas-vs-dense difference over `trials` random diagonally
/// dominant systems of size `n`.
pub fn thomas_vs_dense(n: usize, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let lower: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n)
            .map(|i| lower[i].abs() + upper[i].abs() + rng.random_range(0.1..2.0))
            .collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = diag[i];
            if i > 0 {
                dense[i][i - 1] = lower[i];
            }
            if i + 1 < n {
                dense[i][i + 1] = upper[i];
            }
        }
        let want = dense_solve(dense, rhs.clone());
        let mut got = rhs;
        thomas_solve(&lower, &diag, &upper, &mut got).unwrap();
        worst = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    worst
}

/// Constant coefficients `h` and reaction `c`, with an optional source.
pub struct Constant {
    pub h: [f64; 6],
    pub c: f64,
}

impl PdeModel for Constant {
    fn coefficients(&self, _: f64, _: f64, _: f64, _: f64) -> [f64; 6] {
        self.h
    }
    fn reaction(&self, _: f64, _: f64, _: f64, _: f64) -> f64 {
        self.c
    }
}

fn dirichlet_box(f: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + Clone + 'static) -> BoundarySpec {
    BoundarySpec {
        instrument: InstrumentKind::Custom,
        r_lower: FaceRule::dirichlet(f.clone()),
        r_upper: FaceRule::dirichlet(f.clone()),
        v_lower: FaceRule::dirichlet(f.clone()),
        v_upper: FaceRule::dirichlet(f.clone()),
        y_lower: FaceRule::dirichlet(f.clone()),
        y_upper: FaceRule::dirichlet(f),
    }
}

/// `L U` at interior nodes: the three directional operators plus the mixed term.
fn full_operator(g: &Grid3, model: &dyn PdeModel, b: &BoundarySpec) -> Vec<f64> {
    let mut acc = apply_mixed(g, 0.0, model, b);
    for d in Direction::ALL {
        for (a, x) in acc.iter_mut().zip(apply_operator(d, g, 0.0, model, b)) {
            *a += x;
        }
    }
    acc
}

/// Worst interior error of the discrete operator on uniform axes, for a
/// linear, a quadratic and a bilinear field, with all coefficients active.
pub fn stencil_exactness() -> [f64; 3] {
    let axes = Arc::new(Axes::new(
        Axis::uniform(0.0, 2.0, 9).unwrap(),
        Axis::uniform(0.5, 3.0, 7).unwrap(),
        Axis::uniform(0.0, 1.5, 8).unwrap(),
    ));
    let h = [0.7, 0.4, -0.3, 1.1, -0.6, 0.9];
    let c = 0.25;
    let model = Constant { h, c };
    let b = dirichlet_box(|_, _, _, _| 0.0);
    // (field, L field) pairs
    type Field = Box<dyn Fn(f64, f64, f64) -> f64>;
    let cases: [(Field, Field); 3] = [
        (
            Box::new(|r, v, y| 1.0 + 2.0 * r - v + 0.5 * y),
            Box::new(move |r, v, y| h[3] * 2.0 - h[4] + h[5] * 0.5 - c * (1.0 + 2.0 * r - v + 0.5 * y)),
        ),
        (
            Box::new(|r, v, y| 3.0 * r * r - 2.0 * v * v + 0.7 * y * y + r),
            Box::new(move |r, v, y| {
                h[0] * 6.0 - h[1] * 4.0 + h[3] * (6.0 * r + 1.0) - h[4] * 4.0 * v + h[5] * 1.4 * y
                    - c * (3.0 * r * r - 2.0 * v * v + 0.7 * y * y + r)
            }),
        ),
        (
            Box::new(|r, v, y| 1.5 * r * v - 0.8 * v * y + 0.3 * r * y),
            Box::new(move |r, v, y| {
                h[2] * 1.5 + h[3] * (1.5 * v + 0.3 * y) + h[4] * (1.5 * r - 0.8 * y) + h[5] * (-0.8 * v + 0.3 * r)
                    - c * (1.5 * r * v - 0.8 * v * y + 0.3 * r * y)
            }),
        ),
    ];
    cases.map(|(f, lf)| {
        let g = Grid3::from_fn(axes.clone(), 0.0, |r, v, y| f(r, v, y));
        let lu = full_operator(&g, &model, &b);
        let (nr, nv, ny) = axes.dims();
        let mut worst = 0.0f64;
        for i in 1..nr - 1 {
            for j in 1..nv - 1 {
                for k in 1..ny - 1 {
                    let (r, v, y) = axes.coords(i, j, k);
                    worst = worst.max((lu[axes.index(i, j, k)] - lf(r, v, y)).abs());
                }
            }
        }
        worst
    })
}

/// Worst `x → z → x` and `z → x → z` (relative) error over the reference axes.
pub fn metric_round_trip() -> f64 {
    let m = MeshConfig::caplet_reference();
    let axes = m.build_axes(4.0, None).unwrap();
    let mut worst = 0.0f64;
    for axis in [&axes.r, &axes.v, &axes.y] {
        let span = axis.upper() - axis.lower();
        for q in 0..=1000 {
            let x = q as f64 / 1000.0;
            let z = axis.computational_to_physical(x);
            worst = worst.max((axis.physical_to_computational(z).unwrap() - x).abs());
            let z2 = axis.lower() + span * x;
            let back = axis.computational_to_physical(axis.physical_to_computational(z2).unwrap());
            worst = worst.max((back - z2).abs() / span);
        }
    }
    worst
}

/// Smooth manufactured field with variable coefficients; the source makes
/// `U(t, r, v, y)` an exact solution.
pub struct Manufactured;

impl Manufactured {
    const A: f64 = 0.8;
    const B: f64 = 0.3;

    pub fn exact(t: f64, r: f64, v: f64, y: f64) -> f64 {
        let a = (0.2 * (t - 1.0)).exp();
        a * (Self::A * r + Self::B).sin() * (0.5 * v).cos() * (1.0 + 0.3 * y + 0.1 * y * y) + 0.1 * r * v
    }

    fn h(r: f64, v: f64) -> [f64; 6] {
        [0.3 + 0.1 * r, 0.05 + 0.2 * v, 0.1, 0.2 - 0.1 * r, 0.25 * (1.0 - v), 0.3]
    }
}

impl PdeModel for Manufactured {
    fn coefficients(&self, _: f64, r: f64, v: f64, _: f64) -> [f64; 6] {
        Self::h(r, v)
    }
    fn reaction(&self, _: f64, r: f64, _: f64, _: f64) -> f64 {
        0.1 + 0.02 * r
    }
    fn source(&self, t: f64, r: f64, v: f64, y: f64) -> f64 {
        let a = (0.2 * (t - 1.0)).exp();
        let (s, c) = ((Self::A * r + Self::B).sin(), (Self::A * r + Self::B).cos());
        let (cv, sv) = ((0.5 * v).cos(), (0.5 * v).sin());
        let yy = 1.0 + 0.3 * y + 0.1 * y * y;
        let u = Self::exact(t, r, v, y);
        let u_t = 0.2 * a * s * cv * yy;
        let u_r = a * Self::A * c * cv * yy + 0.1 * v;
        let u_rr = -a * Self::A * Self::A * s * cv * yy;
        let u_v = -0.5 * a * s * sv * yy + 0.1 * r;
        let u_vv = -0.25 * a * s * cv * yy;
        let u_rv = -0.5 * Self::A * a * c * sv * yy + 0.1;
        let u_y = a * s * cv * (0.3 + 0.2 * y);
        let h = Self::h(r, v);
        let lu = h[0] * u_rr + h[1] * u_vv + h[2] * u_rv + h[3] * u_r + h[4] * u_v + h[5] * u_y
            - self.reaction(t, r, v, y) * u;
        -(u_t + lu)
    }
    fn has_source(&self) -> bool {
        true
    }
}

/// Max-norm error at `t = 0` of the manufactured problem on `n³` stretched nodes.
pub fn manufactured_error(n: usize, steps: usize) -> f64 {
    let axis = |lower, upper, center| {
        build_axis(MetricParams { center, alpha: 1.0, lower, upper }, n).unwrap()
    };
    let axes = Arc::new(Axes::new(axis(0.0, 4.0, 1.5), axis(0.0, 3.0, 1.0), axis(0.0, 2.0, 0.0)));
    let problem = Problem {
        axes: axes.clone(),
        model: &Manufactured,
        boundary: dirichlet_box(Manufactured::exact),
        terminal: Grid3::from_fn(axes.clone(), 1.0, |r, v, y| Manufactured::exact(1.0, r, v, y)),
        horizon: 1.0,
    };
    let cfg = SolverConfig {
        steps_per_year: steps,
        ..SolverConfig::default()
    };
    let (g, _) = run(&problem, &cfg).unwrap();
    let mut worst = 0.0f64;
    for (idx, u) in g.data().iter().enumerate() {
        let (i, j, k) = axes.unravel(idx);
        let (r, v, y) = axes.coords(i, j, k);
        worst = worst.max((u - Manufactured::exact(0.0, r, v, y)).abs());
    }
    worst
}

/// Observed spatial orders between successive doublings of `Δx`.
pub fn manufactured_orders() -> Vec<f64> {
    let errs: Vec<f64> = [9, 17, 33].iter().map(|&n| manufactured_error(n, 64)).collect();
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Spread over the `v` nodes of the full-3D bond solution through the spot
/// `(r, y = 0)`, and the worst deviation from the closed form on that line.
pub fn bond_v_spread() -> (f64, f64) {
    let curve = flat();
    let mut mesh = MeshConfig::zcb_reference();
    mesh.zcb_full_3d = true;
    let spot = default_spot(&curve);
    let res = price_zcb(MATURITY, &curve, &params(), &mesh, &solver(12), spot).unwrap();
    let axes = res.grid.axes().clone();
    let sr = spot.r / mesh.r0;
    let line: Vec<f64> = axes
        .v
        .z_nodes()
        .iter()
        .map(|&v| interpolate_at(&res.grid, sr, v, 0.0).unwrap())
        .collect();
    let max = line.iter().copied().fold(f64::MIN, f64::max);
    let min = line.iter().copied().fold(f64::MAX, f64::min);
    let closed = res.closed_form.unwrap();
    let dev = line.iter().map(|u| (u - closed).abs()).fold(0.0, f64::max);
    (max - min, dev)
}

/// Premiums over `strikes` on a mesh whose `r` concentration is pinned,
/// so the strike moves relative to the nodes.
pub fn pinned_ladder(strikes: &[f64], smoothing: bool) -> Vec<f64> {
    let curve = flat();
    let mut mesh = caplet_mesh(50, 20, 20);
    mesh.r.center = Some(4.0);
    let mut cfg = solver(12);
    cfg.smoothing.enabled = smoothing;
    price_caplet_ladder(1.0, 2.0, strikes, &curve, &params(), &mesh, &cfg, default_spot(&curve))
        .unwrap()
        .into_iter()
        .map(|q| q.premium)
        .collect()
}

/// Premiums over `strikes` on the 100×40×40 caplet mesh, each concentrated
/// at its own strike.
pub fn reference_ladder(strikes: &[f64]) -> Vec<f64> {
    let curve = flat();
    price_caplet_ladder(1.0, 2.0, strikes, &curve, &params(), &caplet_mesh(100, 40, 40), &solver(12), default_spot(&curve))
        .unwrap()
        .into_iter()
        .map(|q| q.premium)
        .collect()
}

/// Largest increase of `premiums` between successive strikes; zero or
/// negative when the ladder is nonincreasing.
pub fn worst_increase(premiums: &[f64]) -> f64 {
    premiums.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max)
}

/// `max - min` of the second difference of `premiums`.
pub fn second_difference_oscillation(premiums: &[f64]) -> f64 {
    let d2: Vec<f64> = premiums.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    d2.iter().copied().fold(f64::MIN, f64::max) - d2.iter().copied().fold(f64::MAX, f64::min)
}

pub fn strike_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Log-log slope of the RMS bond error of the Monte Carlo discount factor
/// against the path count, each RMS taken over `seeds` independent runs.
pub fn martingale_slope(seeds: u64) -> (f64, Vec<(usize, f64)>) {
    let curve = flat();
    let target = 1.04f64.powf(-5.0);
    let counts = [1_000usize, 10_000, 100_000];
    let rms: Vec<(usize, f64)> = counts
        .iter()
        .map(|&n| {
            let ms: f64 = (0..seeds)
                .map(|s| {
                    let cfg = McConfig {
                        n_paths: n,
                        steps_per_year: 24,
                        seed: 1000 + s,
                        ..McConfig::default()
                    };
                    let e = simulate_zcb(5.0, &curve, &params(), &cfg).unwrap().mean - target;
                    e * e
                })
                .sum::<f64>()
                / seeds as f64;
            (n, ms.sqrt())
        })
        .collect();
    let xs: Vec<f64> = rms.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = rms.iter().map(|(_, e)| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    (slope, rms)
}

pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

pub fn sequential_solver() -> SolverConfig {
    SolverConfig {
        execution: Execution::Sequential,
        ..solver(12)
    }
}
