//! TOML job description.
//!
//! Every section is optional. An empty file prices the reference caplet
//! (expiry 1y, payment 2y, strike 4%) on the flat 4% curve with the reference
//! model parameters.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hjm_sv::instruments::{AxisConfig, MeshConfig};
use hjm_sv::mc::McConfig;
use hjm_sv::model::{CapletSpec, InitialCurve, ModelParams};
use hjm_sv::solver::SolverConfig;
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    pub instrument: InstrumentConfig,
    pub curve: CurveConfig,
    pub model: ModelParams,
    pub mesh: MeshSection,
    pub solver: SolverConfig,
    pub mc: McConfig,
    pub convergence: ConvergenceConfig,
    /// Output directory; `--out` takes precedence.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstrumentKind {
    Zcb,
    #[default]
    Caplet,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstrumentConfig {
    pub kind: InstrumentKind,
    /// Bond maturity in years.
    pub maturity: f64,
    /// Caplet fixing date in years.
    pub expiry: f64,
    /// Caplet payment date in years.
    pub payment: f64,
    pub strike: f64,
    /// Optional strike ladder; when non-empty it replaces `strike`.
    pub strikes: Vec<f64>,
}

impl Default for InstrumentConfig {
    fn default() -> Self {
        InstrumentConfig {
            kind: InstrumentKind::Caplet,
            maturity: 20.0,
            expiry: 1.0,
            payment: 2.0,
            strike: 0.04,
            strikes: Vec::new(),
        }
    }
}

impl InstrumentConfig {
    pub fn strikes(&self) -> Vec<f64> {
        if self.strikes.is_empty() {
            vec![self.strike]
        } else {
            self.strikes.clone()
        }
    }

    pub fn caplet(&self, strike: f64) -> Result<CapletSpec> {
        CapletSpec::new(self.expiry, self.payment, strike).context("invalid caplet")
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            InstrumentKind::Zcb => {
                if !(self.maturity >= 0.0 && self.maturity.is_finite()) {
                    bail!("instrument.maturity must be >= 0, got {}", self.maturity);
                }
            }
            InstrumentKind::Caplet => {
                for k in self.strikes() {
                    self.caplet(k)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    /// Flat curve `p(0, T) = base^-T`.
    pub flat: Option<f64>,
    /// Quote table of `maturity discount_factor` lines.
    pub quotes: Option<PathBuf>,
}

impl CurveConfig {
    pub fn load(&self, base_dir: &Path) -> Result<InitialCurve> {
        match (&self.flat, &self.quotes) {
            (Some(_), Some(_)) => bail!("curve: set either `flat` or `quotes`, not both"),
            (_, Some(path)) => {
                let path = if path.is_relative() { base_dir.join(path) } else { path.clone() };
                InitialCurve::from_file(&path).with_context(|| format!("reading quotes {}", path.display()))
            }
            (base, None) => Ok(InitialCurve::flat(base.unwrap_or(1.04))?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshPreset {
    /// Instrument-specific reference mesh.
    #[default]
    Reference,
    /// Rate axes on [0, 250] with α = 0.05, variance on [0, 30] with α = 0.5.
    Paper,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub preset: MeshPreset,
    /// `[nr, nv, ny]`; `nv` is ignored by bonds unless `zcb_full_3d`.
    pub nodes: Option<[usize; 3]>,
    pub r: Option<AxisConfig>,
    pub v: Option<AxisConfig>,
    pub y: Option<AxisConfig>,
    pub r0: Option<f64>,
    pub zcb_full_3d: bool,
}

impl MeshSection {
    pub fn resolve(&self, kind: InstrumentKind) -> MeshConfig {
        let mut mesh = match (self.preset, kind) {
            (MeshPreset::Paper, _) => MeshConfig::default(),
            (MeshPreset::Reference, InstrumentKind::Zcb) => MeshConfig::zcb_reference(),
            (MeshPreset::Reference, InstrumentKind::Caplet) => MeshConfig::caplet_reference(),
        };
        if let Some(r) = self.r {
            mesh.r = r;
        }
        if let Some(v) = self.v {
            mesh.v = v;
        }
        if let Some(y) = self.y {
            mesh.y = y;
        }
        if let Some([nr, nv, ny]) = self.nodes {
            mesh.r.nodes = nr;
            mesh.v.nodes = nv;
            mesh.y.nodes = ny;
        }
        if let Some(r0) = self.r0 {
            mesh.r0 = r0;
        }
        mesh.zcb_full_3d = self.zcb_full_3d;
        mesh
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Mesh sweep as `[nr, nv, ny]` triples at the configured step count.
    pub meshes: Vec<[usize; 3]>,
    /// Steps-per-year sweep on the configured mesh.
    pub steps: Vec<usize>,
}

impl ConvergenceConfig {
    pub fn meshes_for(&self, kind: InstrumentKind) -> Vec<[usize; 3]> {
        if !self.meshes.is_empty() {
            return self.meshes.clone();
        }
        match kind {
            InstrumentKind::Zcb => vec![[50, 1, 20], [100, 1, 40], [200, 1, 80]],
            InstrumentKind::Caplet => vec![[50, 40, 40], [100, 40, 40], [200, 40, 40]],
        }
    }

    pub fn steps(&self) -> Vec<usize> {
        if self.steps.is_empty() {
            vec![6, 12, 24]
        } else {
            self.steps.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        for w in self.meshes.windows(2) {
            if w[1].iter().zip(&w[0]).any(|(b, a)| b < a) {
                bail!("convergence.meshes must be nondecreasing, got {:?} after {:?}", w[1], w[0]);
            }
        }
        if self.steps.windows(2).any(|w| w[1] <= w[0]) {
            bail!("convergence.steps must be increasing, got {:?}", self.steps);
        }
        Ok(())
    }
}

/// A parsed job plus the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: JobConfig,
    pub base_dir: PathBuf,
}

impl Job {
    pub fn load(path: Option<&Path>) -> Result<Job> {
        let Some(path) = path else {
            return Ok(Job {
                config: JobConfig::default(),
                base_dir: PathBuf::from("."),
            });
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config = Self::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(Job { config, base_dir })
    }

    pub fn parse(text: &str) -> Result<JobConfig> {
        let config: JobConfig = toml::from_str(text)?;
        config.instrument.validate()?;
        config.model.validate()?;
        config.solver.validate()?;
        config.mc.validate()?;
        config.convergence.validate()?;
        config.mesh.resolve(config.instrument.kind).validate()?;
        Ok(config)
    }

    pub fn curve(&self) -> Result<InitialCurve> {
        self.config.curve.load(&self.base_dir)
    }

    pub fn mesh(&self) -> MeshConfig {
        self.config.mesh.resolve(self.config.instrument.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_reference_caplet() {
        let cfg = Job::parse("").unwrap();
        assert_eq!(cfg.instrument.kind, InstrumentKind::Caplet);
        assert_eq!(cfg.instrument.strikes(), vec![0.04]);
        assert_eq!(cfg.model, ModelParams::reference());
        let mesh = cfg.mesh.resolve(cfg.instrument.kind);
        assert_eq!((mesh.r.nodes, mesh.v.nodes, mesh.y.nodes), (100, 40, 40));
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = Job::parse(
            r#"
            [instrument]
            kind = "zcb"
            maturity = 10.0
            [mesh]
            preset = "paper"
            nodes = [60, 1, 30]
            [solver]
            steps_per_year = 24
            scheme = "douglas"
            y_boundary_order = "first"
            [mc]
            n_paths = 1000
            "#,
        )
        .unwrap();
        assert_eq!(cfg.instrument.kind, InstrumentKind::Zcb);
        assert_eq!(cfg.solver.steps_per_year, 24);
        assert_eq!(cfg.mc.n_paths, 1000);
        let mesh = cfg.mesh.resolve(cfg.instrument.kind);
        assert_eq!(mesh.r.nodes, 60);
        assert_eq!(mesh.r.alpha, 0.05);
    }

    #[test]
    fn invalid_configs_name_the_problem() {
        let err = Job::parse("[instrument]\nexpiry = 2.0\npayment = 1.0\n").unwrap_err();
        assert!(format!("{err:#}").contains("payment"), "{err:#}");
        assert!(Job::parse("[model]\nrho = 1.5\n").is_err());
        assert!(Job::parse("[solver]\ntheta = 2.0\n").is_err());
        assert!(Job::parse("unknown_key = 1\n").is_err());
        assert!(Job::parse("[convergence]\nsteps = [24, 12]\n").is_err());
        assert!(Job::parse("[curve]\nflat = 1.04\nquotes = \"q.txt\"\n").is_ok());
    }
}
