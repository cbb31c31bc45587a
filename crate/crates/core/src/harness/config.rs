use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::helmholtz::{theta_max, FamilyKind, HelmholtzConfig};
use crate::krylov::CostMode;

/// Benchmark family as written in a config file. The shape amplitude may be
/// given directly or as a fraction of its admissible maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Affine {
        eta: Vec<f64>,
    },
    Shape {
        dims: usize,
        decay: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude_fraction: Option<f64>,
    },
}

impl FamilySpec {
    pub fn dims(&self) -> usize {
        match self {
            FamilySpec::Affine { eta } => eta.len(),
            FamilySpec::Shape { dims, .. } => *dims,
        }
    }

    pub fn to_kind(&self, cfg: &HelmholtzConfig) -> Result<FamilyKind> {
        match self {
            FamilySpec::Affine { eta } => Ok(FamilyKind::Affine { eta: eta.clone() }),
            FamilySpec::Shape { dims, decay, amplitude, amplitude_fraction } => {
                let amplitude = match (amplitude, amplitude_fraction) {
                    (Some(a), None) => *a,
                    (None, Some(f)) => {
                        if !(*f > 0.0 && *f < 1.0) {
                            return Err(Error::InvalidArgument("amplitude_fraction must lie in (0, 1)".into()));
                        }
                        if !(*decay > 1.0) {
                            return Err(Error::InvalidArgument("shape decay must exceed 1".into()));
                        }
                        f * theta_max(*decay, cfg.r_in)
                    }
                    _ => {
                        return Err(Error::InvalidArgument(
                            "shape family needs exactly one of amplitude and amplitude_fraction".into(),
                        ))
                    }
                };
                Ok(FamilyKind::Shape { dims: *dims, amplitude, decay: *decay })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Independent uniform draws.
    #[default]
    Uniform,
    /// Halton points with a seeded random shift.
    Halton,
    /// Tensor grid of cell centres; `n_points` must be a perfect power.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct CostSpec {
    pub mode: CostMode,
    /// Seconds per nonzero for one factorization (synthetic mode).
    pub c_pc: f64,
    /// Seconds per nonzero for one Krylov iteration (synthetic mode).
    pub c_krylov: f64,
}

impl Default for CostSpec {
    fn default() -> Self {
        Self { mode: CostMode::Synthetic, c_pc: 1e-6, c_krylov: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSpec {
    pub sp_window: usize,
    /// Extra random points solved with the mean preconditioner to trace the
    /// surrogate error; zero disables the trace.
    pub holdout_points: usize,
}

impl Default for TrainingSpec {
    fn default() -> Self {
        Self { sp_window: 5, holdout_points: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementSpec {
    pub starts: usize,
    pub max_iterations: usize,
    /// Synthetic-mode stopping floor on the relative cost gain.
    pub rel_improvement_floor: f64,
    /// Measured-mode weight of the time one iteration takes.
    pub kappa: f64,
}

impl Default for PlacementSpec {
    fn default() -> Self {
        Self { starts: 5, max_iterations: 50, rel_improvement_floor: 1e-4, kappa: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Directory for solution vectors in Matrix Market format.
    pub solutions_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    #[serde(default)]
    pub helmholtz: HelmholtzConfig,
    pub n_points: usize,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cost: CostSpec,
    #[serde(default)]
    pub training: TrainingSpec,
    #[serde(default)]
    pub placement: PlacementSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Also solve all of `W` with the mean preconditioner to report the
    /// mean-based baseline next to the pipeline.
    #[serde(default = "default_true")]
    pub compare_baselines: bool,
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.helmholtz.validate()?;
        if self.n_points == 0 {
            return Err(Error::InvalidArgument("n_points must be at least 1".into()));
        }
        if self.family.dims() == 0 {
            return Err(Error::InvalidArgument("family needs at least one parameter".into()));
        }
        // constructs and checks the family parameters (η range, amplitude bound)
        crate::helmholtz::ProblemFamily::from_kind(&self.family.to_kind(&self.helmholtz)?, &self.helmholtz)?;
        if self.cost.mode == CostMode::Synthetic && !(self.cost.c_pc > 0.0 && self.cost.c_krylov > 0.0) {
            return Err(Error::InvalidArgument("synthetic cost constants must be positive".into()));
        }
        if self.training.sp_window == 0 {
            return Err(Error::InvalidArgument("sp_window must be positive".into()));
        }
        if self.placement.starts == 0 || self.placement.max_iterations == 0 {
            return Err(Error::InvalidArgument("placement starts and max_iterations must be positive".into()));
        }
        if self.sampling == Sampling::Grid {
            grid_side(self.n_points, self.family.dims())?;
        }
        Ok(())
    }

    /// JSON schema of the config document.
    pub fn json_schema() -> serde_json::Value {
        serde_json::to_value(schemars::schema_for!(ExperimentConfig)).expect("schema serializes")
    }
}

/// Points per dimension of a tensor grid with `n` points in `dims` dimensions.
pub(crate) fn grid_side(n: usize, dims: usize) -> Result<usize> {
    let side = (n as f64).powf(1.0 / dims as f64).round() as usize;
    if side.checked_pow(dims as u32) != Some(n) {
        return Err(Error::InvalidArgument(format!(
            "grid sampling needs n_points to be a {dims}-th power, got {n}"
        )));
    }
    Ok(side)
}
