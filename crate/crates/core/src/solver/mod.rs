//! Backward time integration of the discretized pricing equation.

mod douglas;
mod smoothing;
mod thomas;

pub use douglas::{douglas_step, AdiScheme, ExplicitTime, StepContext, StepStats};
pub use smoothing::{sample_terminal, smooth_terminal};
pub use thomas::{thomas_solve, thomas_solve_with};
pub(crate) use thomas::thomas_first_row;

use std::io::{self, Write};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::discretization::{Axes, BoundarySpec, Grid3, OneSided, PdeModel};
use crate::error::{Error, Result};
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingConfig {
    pub enabled: bool,
    /// Midpoint samples per dimension.
    pub subsamples: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            enabled: true,
            subsamples: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Implicitness weight of the Douglas factors; 0.5 is Crank–Nicolson.
    pub theta: f64,
    pub steps_per_year: usize,
    pub scheme: AdiScheme,
    /// Number of fully implicit substeps that replace the first step; they
    /// damp the high frequencies left by a kinked terminal condition. Zero
    /// disables the start-up.
    pub damping_substeps: usize,
    /// Time level of the coefficients in the explicit predictor.
    pub explicit_time: ExplicitTime,
    /// One-sided order on the `y = 0` face.
    pub y_boundary_order: OneSided,
    pub smoothing: SmoothingConfig,
    /// `max |U|` above which a run is declared divergent.
    pub divergence_bound: f64,
    pub execution: Execution,
    /// Keep a per-step record in the report.
    pub record_steps: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta: 0.5,
            steps_per_year: 12,
            scheme: AdiScheme::ModifiedCraigSneyd,
            damping_substeps: 4,
            explicit_time: ExplicitTime::default(),
            y_boundary_order: OneSided::Second,
            smoothing: SmoothingConfig::default(),
            divergence_bound: 1e6,
            execution: Execution::default(),
            record_steps: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::param("theta", format!("must lie in [0, 1], got {}", self.theta)));
        }
        if self.scheme == AdiScheme::ModifiedCraigSneyd && self.theta < 1.0 / 3.0 - 1e-12 {
            return Err(Error::param("theta", "modified Craig-Sneyd needs theta >= 1/3"));
        }
        if self.steps_per_year == 0 {
            return Err(Error::param("steps_per_year", "must be at least 1"));
        }
        if self.smoothing.subsamples == 0 {
            return Err(Error::param("smoothing.subsamples", "must be at least 1"));
        }
        if !(self.divergence_bound > 0.0) {
            return Err(Error::param("divergence_bound", "must be positive"));
        }
        Ok(())
    }

    /// Number of steps and step size covering `horizon` years.
    pub fn time_grid(&self, horizon: f64) -> (usize, f64) {
        if horizon <= 0.0 {
            return (0, 0.0);
        }
        let n = (horizon * self.steps_per_year as f64 - 1e-9).ceil().max(1.0) as usize;
        (n, horizon / n as f64)
    }
}

/// A backward problem on `[0, horizon]`: terminal field at `horizon`,
/// boundary rules and PDE coefficients.
pub struct Problem<'a> {
    pub axes: Arc<Axes>,
    pub model: &'a dyn PdeModel,
    pub boundary: BoundarySpec,
    pub terminal: Grid3,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    /// Time to maturity after the step.
    pub tau: f64,
    pub max_delta: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub wall_time: Duration,
    pub n_steps: usize,
    pub dt: f64,
    pub max_delta_last: f64,
    /// All values finite and within the divergence bound at every step.
    pub guard_ok: bool,
    pub steps: Vec<StepRecord>,
}

impl SolveReport {
    /// Writes the per-step checkpoint table.
    pub fn write_steps_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# wall_time_s = {:.6}", self.wall_time.as_secs_f64())?;
        writeln!(w, "step,tau_years,max_abs_delta,max_abs_value")?;
        for s in &self.steps {
            writeln!(w, "{},{:.12},{:.6e},{:.6e}", s.step, s.tau, s.max_delta, s.max_abs)?;
        }
        Ok(())
    }
}

/// Solves `problem` back to `t = 0`.
pub fn run(problem: &Problem<'_>, cfg: &SolverConfig) -> Result<(Grid3, SolveReport)> {
    run_with_observer(problem, cfg, |_, _| Ok(()))
}

fn damped_start(grid: &mut Grid3, dt: f64, substeps: usize, ctx: &StepContext<'_>) -> Result<StepStats> {
    let mut stats = StepStats {
        max_delta: 0.0,
        max_abs: 0.0,
    };
    for _ in 0..substeps {
        let s = douglas_step(grid, dt / substeps as f64, ctx)?;
        stats.max_delta = stats.max_delta.max(s.max_delta);
        stats.max_abs = s.max_abs;
    }
    Ok(stats)
}

/// [`run`] calling `observe` after every step.
pub fn run_with_observer<F>(problem: &Problem<'_>, cfg: &SolverConfig, mut observe: F) -> Result<(Grid3, SolveReport)>
where
    F: FnMut(&StepRecord, &Grid3) -> Result<()>,
{
    cfg.validate()?;
    problem.boundary.validate()?;
    if !(problem.horizon >= 0.0) {
        return Err(Error::param("horizon", "must be non-negative"));
    }
    if !problem.terminal.is_finite() {
        return Err(Error::NonFinite { step: 0 });
    }
    let start = Instant::now();
    let (n_steps, dt) = cfg.time_grid(problem.horizon);
    let mut grid = problem.terminal.clone();
    grid.set_time(problem.horizon);
    let ctx = StepContext {
        model: problem.model,
        boundary: &problem.boundary,
        theta: cfg.theta,
        explicit_time: cfg.explicit_time,
        scheme: cfg.scheme,
        execution: cfg.execution,
    };
    let damped = StepContext {
        theta: 1.0,
        scheme: AdiScheme::Douglas,
        ..ctx
    };
    let mut steps = Vec::new();
    let mut max_delta_last = 0.0;
    for step in 1..=n_steps {
        let outcome = if step == 1 && cfg.damping_substeps > 0 {
            damped_start(&mut grid, dt, cfg.damping_substeps, &damped)
        } else {
            douglas_step(&mut grid, dt, &ctx)
        };
        let stats = outcome.map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFinite { step },
            other => Error::AtStep {
                step,
                source: Box::new(other),
            },
        })?;
        if stats.max_abs > cfg.divergence_bound {
            return Err(Error::Divergence {
                step,
                max_abs: stats.max_abs,
            });
        }
        if step == n_steps {
            // land exactly on the valuation date
            grid.set_time(0.0);
        }
        let record = StepRecord {
            step,
            tau: dt * step as f64,
            max_delta: stats.max_delta,
            max_abs: stats.max_abs,
        };
        observe(&record, &grid)?;
        if cfg.record_steps {
            steps.push(record);
        }
        max_delta_last = stats.max_delta;
    }
    let report = SolveReport {
        wall_time: start.elapsed(),
        n_steps,
        dt,
        max_delta_last,
        guard_ok: true,
        steps,
    };
    Ok((grid, report))
}
