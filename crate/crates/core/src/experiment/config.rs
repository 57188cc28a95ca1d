//! Run configuration, read from TOML with dotted section keys
//! (`grid.N = 128`, or the equivalent `[grid]` table).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridField};
use crate::kernel::gaussian_kernel;
use crate::nonlocal_op::NonlocalOperator;
use crate::potential::{DoubleWell, FloryHuggins, Potential, PotentialKind, PotentialModel};
use crate::scheme::{Order, Predictor, SchemeConfig};

use super::init::{init_cosine, init_random, init_rings};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L", default = "default_half_width")]
    pub half_width: f64,
    #[serde(rename = "N", default = "default_nodes")]
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    #[serde(default = "default_delta")]
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    #[serde(default = "default_potential_kind")]
    pub kind: String,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_theta_c")]
    pub theta_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Replaces the potential's computed stabilization constant.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default = "default_predictor")]
    pub predictor: String,
    #[serde(default)]
    pub strict_mbp_tau: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    /// `cosine`, `rings` or `random`.
    #[serde(default = "default_init_kind")]
    pub kind: String,
    #[serde(rename = "R1", default = "default_r1")]
    pub r1: f64,
    #[serde(rename = "R2", default = "default_r2")]
    pub r2: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    /// Multiply the initial field by `beta` (needed for potentials whose
    /// bound is below one, e.g. rings under Flory-Huggins).
    #[serde(default)]
    pub scale_to_beta: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(rename = "T_final", default = "default_t_final")]
    pub t_final: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub snapshot_every: Option<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub steady_stop: bool,
    #[serde(default = "default_steady_tol")]
    pub steady_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    #[serde(default = "default_k_list")]
    pub k_list: Vec<u32>,
    #[serde(default = "default_reference_k")]
    pub reference_k: u32,
}

fn default_half_width() -> f64 {
    1.0
}
fn default_nodes() -> usize {
    128
}
fn default_delta() -> f64 {
    0.05
}
fn default_potential_kind() -> String {
    "double-well".into()
}
fn default_theta() -> f64 {
    crate::potential::DEFAULT_THETA
}
fn default_theta_c() -> f64 {
    crate::potential::DEFAULT_THETA_C
}
fn default_order() -> u32 {
    2
}
fn default_tau() -> f64 {
    0.01
}
fn default_eps() -> f64 {
    0.05
}
fn default_predictor() -> String {
    "semi-implicit".into()
}
fn default_init_kind() -> String {
    "cosine".into()
}
fn default_r1() -> f64 {
    0.8
}
fn default_r2() -> f64 {
    0.6
}
fn default_amplitude() -> f64 {
    0.5
}
fn default_t_final() -> f64 {
    1.0
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_steady_tol() -> f64 {
    crate::diagnostics::STEADY_STATE_TOL
}
fn default_k_list() -> Vec<u32> {
    (5..=10).collect()
}
fn default_reference_k() -> u32 {
    15
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            half_width: default_half_width(),
            nodes: default_nodes(),
        }
    }
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            delta: default_delta(),
        }
    }
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self {
            kind: default_potential_kind(),
            theta: default_theta(),
            theta_c: default_theta_c(),
        }
    }
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            order: default_order(),
            tau: default_tau(),
            eps: default_eps(),
            kappa: None,
            predictor: default_predictor(),
            strict_mbp_tau: false,
        }
    }
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            kind: default_init_kind(),
            r1: default_r1(),
            r2: default_r2(),
            a: 0.0,
            b: 0.0,
            amplitude: default_amplitude(),
            seed: 0,
            scale_to_beta: false,
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_final: default_t_final(),
            snapshot_times: Vec::new(),
            snapshot_every: None,
            output_dir: default_output_dir(),
            steady_stop: false,
            steady_tol: default_steady_tol(),
        }
    }
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            k_list: default_k_list(),
            reference_k: default_reference_k(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Cosine,
    Rings,
    Random,
}

impl std::str::FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" => Ok(Self::Cosine),
            "rings" => Ok(Self::Rings),
            "random" => Ok(Self::Random),
            other => Err(Error::Config(format!("unknown initial condition `{other}`"))),
        }
    }
}

/// Everything a run needs, built from a validated [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Setup {
    pub grid: Grid2D<f64>,
    pub op: NonlocalOperator<f64>,
    pub potential: PotentialModel<f64>,
    pub scheme: SchemeConfig<f64>,
    pub phi0: GridField<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn potential_kind(&self) -> Result<PotentialKind> {
        self.potential.kind.parse()
    }

    pub fn init_kind(&self) -> Result<InitKind> {
        self.init.kind.parse()
    }

    pub fn order(&self) -> Result<Order> {
        Order::from_int(self.scheme.order).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn predictor(&self) -> Result<Predictor> {
        self.scheme.predictor.parse()
    }

    pub fn validate(&self) -> Result<()> {
        positive("grid.L", self.grid.half_width)?;
        if self.grid.nodes < crate::grid::MIN_NODES {
            return Err(Error::Config(format!(
                "grid.N must be at least {}, got {}",
                crate::grid::MIN_NODES,
                self.grid.nodes
            )));
        }
        positive("kernel.delta", self.kernel.delta)?;
        positive("scheme.tau", self.scheme.tau)?;
        positive("scheme.eps", self.scheme.eps)?;
        if let Some(k) = self.scheme.kappa {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::Config(format!("scheme.kappa must be non-negative, got {k}")));
            }
        }
        self.potential_kind()?;
        self.order()?;
        self.predictor()?;
        if self.init_kind()? != InitKind::Cosine {
            positive("init.amplitude", self.init.amplitude)?;
        }
        if !(self.run.t_final >= 0.0 && self.run.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "run.T_final must be non-negative, got {}",
                self.run.t_final
            )));
        }
        for &t in &self.run.snapshot_times {
            if !(0.0..=self.run.t_final).contains(&t) {
                return Err(Error::Config(format!(
                    "snapshot time {t} outside [0, {}]",
                    self.run.t_final
                )));
            }
        }
        if let Some(dt) = self.run.snapshot_every {
            positive("run.snapshot_every", dt)?;
        }
        positive("run.steady_tol", self.run.steady_tol)?;
        Ok(())
    }

    pub fn build_potential(&self) -> Result<PotentialModel<f64>> {
        let model = match self.potential_kind()? {
            PotentialKind::DoubleWell => PotentialModel::DoubleWell(DoubleWell::new()),
            PotentialKind::FloryHuggins => PotentialModel::FloryHuggins(FloryHuggins::new(
                self.potential.theta,
                self.potential.theta_c,
            )?),
        };
        Ok(match self.scheme.kappa {
            Some(k) => model.with_kappa(k),
            None => model,
        })
    }

    pub fn build_scheme(&self) -> Result<SchemeConfig<f64>> {
        Ok(SchemeConfig::new(self.scheme.tau, self.scheme.eps, self.order()?)?
            .with_predictor(self.predictor()?)
            .with_strict_mbp_tau(self.scheme.strict_mbp_tau))
    }

    pub fn build_initial(&self, grid: &Grid2D<f64>, beta: f64) -> Result<GridField<f64>> {
        let phi0 = match self.init_kind()? {
            InitKind::Cosine => init_cosine(grid),
            InitKind::Rings => init_rings(
                grid,
                self.scheme.eps,
                self.init.r1,
                self.init.r2,
                self.init.a,
                self.init.b,
            )?,
            InitKind::Random => init_random(grid, self.init.amplitude, self.init.seed)?,
        };
        Ok(if self.init.scale_to_beta {
            phi0.scale(beta)
        } else {
            phi0
        })
    }

    pub fn build(&self) -> Result<Setup> {
        self.validate()?;
        let grid = Grid2D::new(self.grid.half_width, self.grid.nodes)?;
        let op = NonlocalOperator::new(gaussian_kernel(self.kernel.delta, &grid)?);
        let potential = self.build_potential()?;
        let scheme = self.build_scheme()?;
        let phi0 = self.build_initial(&grid, potential.beta())?;
        Ok(Setup {
            grid,
            op,
            potential,
            scheme,
            phi0,
        })
    }
}
