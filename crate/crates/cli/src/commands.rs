use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use hjm_sv::discretization::{assemble_line_r, BoundarySpec, Grid3, HjmModel};
use hjm_sv::instruments::{
    caplet_boundary, caplet_terminal, default_spot, price_caplet, price_zcb, zcb_boundary, MeshConfig, PriceResult,
};
use hjm_sv::mc::{characteristic_caplet_price, simulate_caplet, simulate_zcb, McConfig, McEstimate};
use hjm_sv::model::{InitialCurve, ModelParams, StatePoint, TimeFunction};
use hjm_sv::solver::SolverConfig;
use hjm_sv::Execution;

use crate::config::{InstrumentKind, Job};
use crate::output::{num, opt, secs, write_with, Table};

/// Agreement demanded of PDE, Monte Carlo and characteristic prices when the
/// rate volatility vanishes and the Monte Carlo error bar collapses.
const DEGENERATE_TOLERANCE: f64 = 1e-6;

const RK4_STEPS: usize = 2000;

pub fn apply_overrides(job: &mut Job, seed: Option<u64>, threads: usize) -> Result<()> {
    if let Some(seed) = seed {
        job.config.mc.seed = seed;
    }
    match threads {
        0 => {}
        1 => {
            job.config.solver.execution = Execution::Sequential;
            job.config.mc.execution = Execution::Sequential;
        }
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?,
    }
    Ok(())
}

/// Everything a pricing call needs, resolved once from the job.
struct Setup {
    kind: InstrumentKind,
    curve: InitialCurve,
    params: ModelParams,
    mesh: MeshConfig,
    solver: SolverConfig,
    spot: StatePoint,
}

impl Setup {
    fn new(job: &Job) -> Result<Setup> {
        let curve = job.curve()?;
        let spot = default_spot(&curve);
        Ok(Setup {
            kind: job.config.instrument.kind,
            curve,
            params: job.config.model.clone(),
            mesh: job.mesh(),
            solver: job.config.solver,
            spot,
        })
    }

    /// Prices the bond, or the caplet struck at `strike`.
    fn price(&self, job: &Job, strike: Option<f64>) -> Result<PriceResult> {
        let inst = &job.config.instrument;
        let res = match (self.kind, strike) {
            (InstrumentKind::Zcb, _) => {
                price_zcb(inst.maturity, &self.curve, &self.params, &self.mesh, &self.solver, self.spot)?
            }
            (InstrumentKind::Caplet, Some(k)) => price_caplet(
                &inst.caplet(k)?,
                &self.curve,
                &self.params,
                &self.mesh,
                &self.solver,
                self.spot,
            )?,
            (InstrumentKind::Caplet, None) => bail!("caplet pricing needs a strike"),
        };
        Ok(res)
    }

    fn strikes(&self, job: &Job) -> Vec<Option<f64>> {
        match self.kind {
            InstrumentKind::Zcb => vec![None],
            InstrumentKind::Caplet => job.config.instrument.strikes().into_iter().map(Some).collect(),
        }
    }
}

fn kind_name(kind: InstrumentKind) -> &'static str {
    match kind {
        InstrumentKind::Zcb => "zcb",
        InstrumentKind::Caplet => "caplet",
    }
}

fn horizon(job: &Job) -> f64 {
    match job.config.instrument.kind {
        InstrumentKind::Zcb => job.config.instrument.maturity,
        InstrumentKind::Caplet => job.config.instrument.expiry,
    }
}

pub fn price(job: &Job, out: &Path) -> Result<bool> {
    let mut setup = Setup::new(job)?;
    setup.solver.record_steps = true;
    let mut results = Vec::new();
    for strike in setup.strikes(job) {
        let res = setup.price(job, strike)?;
        println!(
            "{} strike={} price={:.10} wall_time={:.3}s",
            kind_name(setup.kind),
            opt(strike),
            res.price,
            res.wall_time().as_secs_f64()
        );
        results.push((strike, res));
    }

    let comments: Vec<String> = results
        .iter()
        .map(|(k, r)| format!("strike {} {}", opt(*k), secs(r.wall_time())))
        .collect();
    let mut table = Table::create(
        out,
        "price.csv",
        &comments,
        &[
            "instrument",
            "strike",
            "horizon_years",
            "price",
            "closed_form",
            "abs_error",
            "rho_per_unit_rate",
            "vega_per_unit_variance",
            "n_steps",
            "guard_ok",
        ],
    )?;
    for (strike, r) in &results {
        table.row([
            kind_name(setup.kind).to_string(),
            opt(*strike),
            num(horizon(job)),
            num(r.price),
            opt(r.closed_form),
            opt(r.error_vs_closed_form()),
            num(r.rho),
            num(r.vega),
            r.report.n_steps.to_string(),
            r.report.guard_ok.to_string(),
        ])?;
    }
    table.finish()?;

    let (_, first) = &results[0];
    write_slice(out, first)?;
    write_with(out, "steps.csv", |w| first.report.write_steps_csv(w))?;

    if results.len() > 1 {
        let mut ladder = Table::create(out, "premiums.csv", &[], &["strike", "premium"])?;
        for (strike, r) in &results {
            ladder.row([opt(*strike), num(r.price)])?;
        }
        ladder.finish()?;
    }
    Ok(results.iter().all(|(_, r)| r.report.guard_ok))
}

/// Price and Greeks over the `y = 0` plane, in unscaled rates.
fn write_slice(out: &Path, res: &PriceResult) -> Result<()> {
    let axes = res.grid.axes().clone();
    let mut t = Table::create(
        out,
        "slice_y0.csv",
        &[],
        &["r", "v", "price", "rho_per_unit_rate", "vega_per_unit_variance"],
    )?;
    for (i, r) in axes.r.z_nodes().iter().enumerate() {
        for (j, v) in axes.v.z_nodes().iter().enumerate() {
            t.row([
                num(res.r0 * r),
                num(*v),
                num(res.grid.get(i, j, 0)),
                num(res.rho_grid.get(i, j, 0)),
                num(res.vega_grid.get(i, j, 0)),
            ])?;
        }
    }
    t.finish()?;
    Ok(())
}

/// `ln(e_prev / e) / ln(n / n_prev)`, when both errors are nonzero.
fn observed_order(e_prev: f64, e: f64, n_prev: usize, n: usize) -> Option<f64> {
    let (a, b) = (e_prev.abs(), e.abs());
    (a > 0.0 && b > 0.0 && n > n_prev).then(|| (a / b).ln() / (n as f64 / n_prev as f64).ln())
}

struct SweepPoint {
    nodes: [usize; 3],
    steps_per_year: usize,
    price: f64,
    closed_form: Option<f64>,
}

pub fn convergence(job: &Job, out: &Path) -> Result<bool> {
    let setup = Setup::new(job)?;
    let strike = setup.strikes(job)[0];
    let base = [setup.mesh.r.nodes, setup.mesh.v.nodes, setup.mesh.y.nodes];
    let conv = &job.config.convergence;

    let mut sweeps: Vec<(&str, Vec<SweepPoint>)> = Vec::new();
    let mut started = Instant::now();
    let mut timings = Vec::new();
    for (name, plan) in [
        ("mesh", conv.meshes_for(setup.kind).into_iter().map(|m| (m, setup.solver.steps_per_year)).collect::<Vec<_>>()),
        ("steps", conv.steps().into_iter().map(|s| (base, s)).collect()),
    ] {
        let mut points = Vec::new();
        for (nodes, spy) in plan {
            let mut s = Setup { mesh: setup.mesh, solver: setup.solver, ..Setup::new(job)? };
            s.mesh.r.nodes = nodes[0];
            s.mesh.v.nodes = nodes[1];
            s.mesh.y.nodes = nodes[2];
            s.solver.steps_per_year = spy;
            let res = s.price(job, strike)?;
            println!("{name}: {}x{}x{} @ {spy}/y -> {:.10}", nodes[0], nodes[1], nodes[2], res.price);
            points.push(SweepPoint {
                nodes,
                steps_per_year: spy,
                price: res.price,
                closed_form: res.closed_form,
            });
        }
        timings.push(format!("{name} sweep {}", secs(started.elapsed())));
        started = Instant::now();
        sweeps.push((name, points));
    }

    let mut t = Table::create(
        out,
        "convergence.csv",
        &timings,
        &[
            "sweep",
            "nr",
            "nv",
            "ny",
            "steps_per_year",
            "price",
            "closed_form",
            "error_or_delta",
            "observed_order",
        ],
    )?;
    for (name, points) in &sweeps {
        // Against the closed form when there is one, else successive deltas.
        let errs: Vec<Option<f64>> = points
            .iter()
            .enumerate()
            .map(|(i, p)| match p.closed_form {
                Some(c) => Some(p.price - c),
                None if i > 0 => Some(p.price - points[i - 1].price),
                None => None,
            })
            .collect();
        let size = |p: &SweepPoint| if *name == "mesh" { p.nodes[0] } else { p.steps_per_year };
        for (i, p) in points.iter().enumerate() {
            let order = match (i.checked_sub(1).and_then(|h| errs[h]), errs[i]) {
                (Some(a), Some(b)) => observed_order(a, b, size(&points[i - 1]), size(p)),
                _ => None,
            };
            t.row([
                name.to_string(),
                p.nodes[0].to_string(),
                p.nodes[1].to_string(),
                p.nodes[2].to_string(),
                p.steps_per_year.to_string(),
                num(p.price),
                opt(p.closed_form),
                opt(errs[i]),
                opt(order),
            ])?;
        }
    }
    t.finish()?;
    Ok(true)
}

fn vanishes(f: &TimeFunction) -> bool {
    match f {
        TimeFunction::Constant(c) => *c == 0.0,
        TimeFunction::Piecewise { values, .. } => values.iter().all(|v| *v == 0.0),
    }
}

struct McCheck {
    strike: Option<f64>,
    pde: f64,
    mc: McEstimate,
    characteristic: Option<f64>,
}

impl McCheck {
    fn z(&self) -> f64 {
        self.mc.z_score(self.pde)
    }

    fn pass(&self) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= DEGENERATE_TOLERANCE;
        let mc_ok = self.z().abs() <= 3.0 || close(self.pde, self.mc.mean);
        let ode_ok = self
            .characteristic
            .is_none_or(|c| close(self.pde, c) && close(self.mc.mean, c));
        mc_ok && ode_ok
    }
}

pub fn validate_mc(job: &Job, out: &Path) -> Result<bool> {
    let setup = Setup::new(job)?;
    let mc_cfg: McConfig = job.config.mc;
    let inst = &job.config.instrument;
    let started = Instant::now();
    let mut checks = Vec::new();
    for strike in setup.strikes(job) {
        let pde = setup.price(job, strike)?.price;
        let (mc, characteristic) = match strike {
            None => (simulate_zcb(inst.maturity, &setup.curve, &setup.params, &mc_cfg)?, None),
            Some(k) => {
                let spec = inst.caplet(k)?;
                let mc = simulate_caplet(&spec, &setup.curve, &setup.params, &mc_cfg)?;
                let ode = if vanishes(&setup.params.lambda) {
                    let x0 = setup.spot.x(&setup.curve);
                    Some(characteristic_caplet_price(&spec, &setup.curve, setup.params.kappa, x0, setup.spot.y, RK4_STEPS)?)
                } else {
                    None
                };
                (mc, ode)
            }
        };
        let check = McCheck {
            strike,
            pde,
            mc,
            characteristic,
        };
        println!(
            "strike={} pde={:.8} mc={:.8} ± {:.2e} z={:+.2} {}",
            opt(strike),
            check.pde,
            check.mc.mean,
            check.mc.std_error,
            check.z(),
            if check.pass() { "PASS" } else { "FAIL" }
        );
        checks.push(check);
    }

    let mut t = Table::create(
        out,
        "validate_mc.csv",
        &[format!("seed = {}", mc_cfg.seed), secs(started.elapsed())],
        &[
            "instrument",
            "strike",
            "pde_price",
            "mc_mean",
            "mc_std_error",
            "n_paths",
            "z_score",
            "characteristic_price",
            "status",
        ],
    )?;
    for c in &checks {
        t.row([
            kind_name(setup.kind).to_string(),
            opt(c.strike),
            num(c.pde),
            num(c.mc.mean),
            num(c.mc.std_error),
            c.mc.n_paths.to_string(),
            num(c.z()),
            opt(c.characteristic),
            if c.pass() { "PASS" } else { "FAIL" }.to_string(),
        ])?;
    }
    t.finish()?;
    Ok(checks.iter().all(McCheck::pass))
}

pub fn mesh_dump(job: &Job, out: &Path) -> Result<bool> {
    let s = Setup::new(job)?;
    let inst = &job.config.instrument;
    let r0 = s.mesh.r0;
    let model = HjmModel::new(s.params.clone(), s.curve.clone(), r0);
    let order = s.solver.y_boundary_order;
    let (axes, boundary, terminal, horizon): (_, BoundarySpec, Grid3, f64) = match s.kind {
        InstrumentKind::Zcb => {
            let v_point = (!s.mesh.zcb_full_3d).then_some(s.spot.v);
            let axes = s.mesh.build_axes(s.spot.r / r0, v_point)?;
            let terminal = Grid3::filled(axes.clone(), 1.0, inst.maturity);
            let boundary = zcb_boundary(inst.maturity, &s.curve, &s.params, r0, order);
            (axes, boundary, terminal, inst.maturity)
        }
        InstrumentKind::Caplet => {
            let spec = inst.caplet(inst.strikes()[0])?;
            let axes = s.mesh.build_axes(spec.strike / r0, None)?;
            let terminal = caplet_terminal(axes.clone(), &spec, &s.curve, &s.params, r0, &s.solver);
            let boundary = caplet_boundary(&spec, &s.curve, &s.params, r0, order);
            (axes, boundary, terminal, spec.expiry)
        }
    };
    write_with(out, "axis_r.csv", |w| axes.r.write_csv(w))?;
    write_with(out, "axis_v.csv", |w| axes.v.write_csv(w))?;
    write_with(out, "axis_y.csv", |w| axes.y.write_csv(w))?;

    // The r line through the spot variance at y = 0, at the terminal time.
    let j = axes
        .v
        .z_nodes()
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - s.spot.v).abs().total_cmp(&(b.1 - s.spot.v).abs()))
        .map_or(0, |(j, _)| j);
    let (_, dt) = s.solver.time_grid(horizon);
    let line = assemble_line_r(horizon, j, 0, &axes, &model, &boundary, s.solver.theta * dt);
    let rhs: Vec<f64> = (0..axes.r.len()).map(|i| terminal.get(i, j, 0)).collect();
    write_with(out, "line_r.csv", |w| line.write_csv(w, &rhs))?;
    println!("wrote axes {:?} and the r line at v = {}", axes.dims(), axes.v.z_nodes()[j]);
    Ok(true)
}

fn time_best<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(Duration, Duration, T)> {
    let mut best = Duration::MAX;
    let mut total = Duration::ZERO;
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        last = Some(f()?);
        let el = start.elapsed();
        best = best.min(el);
        total += el;
    }
    let value = last.expect("at least one repetition");
    Ok((best, total / repeats.max(1) as u32, value))
}

pub fn bench(job: &Job, out: &Path, repeats: usize) -> Result<bool> {
    let base = Setup::new(job)?;
    let strike = base.strikes(job)[0];
    let threads = rayon::current_num_threads();
    let mut t = Table::create(
        out,
        "bench.csv",
        &[format!("threads = {threads}")],
        &["task", "execution", "repeats", "best_s", "mean_s", "value"],
    )?;
    for exec in [Execution::Sequential, Execution::Parallel] {
        let label = format!("{exec:?}").to_lowercase();
        let mut s = Setup::new(job)?;
        s.solver.execution = exec;
        let (best, mean, res) = time_best(repeats, || s.price(job, strike))?;
        println!("pde {label}: best {:.3}s", best.as_secs_f64());
        t.row([
            format!("pde_{}", kind_name(s.kind)),
            label.clone(),
            repeats.to_string(),
            format!("{:.6}", best.as_secs_f64()),
            format!("{:.6}", mean.as_secs_f64()),
            num(res.price),
        ])?;

        let mc_cfg = McConfig {
            execution: exec,
            ..job.config.mc
        };
        let inst = &job.config.instrument;
        let (best, mean, est) = time_best(repeats, || match strike {
            None => Ok(simulate_zcb(inst.maturity, &s.curve, &s.params, &mc_cfg)?),
            Some(k) => Ok(simulate_caplet(&inst.caplet(k)?, &s.curve, &s.params, &mc_cfg)?),
        })?;
        println!("mc {label}: best {:.3}s", best.as_secs_f64());
        t.row([
            format!("mc_{}", kind_name(s.kind)),
            label,
            repeats.to_string(),
            format!("{:.6}", best.as_secs_f64()),
            format!("{:.6}", mean.as_secs_f64()),
            num(est.mean),
        ])?;
    }
    t.finish()?;
    Ok(true)
}
