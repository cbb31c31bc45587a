use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use num_complex::Complex64;

use super::config::{CostSpec, ExperimentConfig};
use crate::error::Result;
use crate::helmholtz::{assemble, build_annulus_mesh, AnnulusMesh, HelmholtzConfig, ProblemFamily};
use crate::krylov::{gmres_left, lu_factor, matrix_market, CostMode, CsrMatrix, LuPreconditioner};
use crate::surrogate::{OracleSolve, SolveOracle};

/// One GMRES solve at a point of `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSolve {
    pub iterations: usize,
    pub converged: bool,
    pub krylov_time: f64,
}

/// Assembles and solves the scattering problem for a fixed family and mesh,
/// charging times either from the clock or from the nonzero count.
pub struct HelmholtzSolver {
    cfg: HelmholtzConfig,
    family: ProblemFamily,
    mesh: AnnulusMesh,
    cost: CostSpec,
    /// Nonzeros of the system at the box centre; sizes the synthetic costs.
    nnz: usize,
    solutions_dir: Option<PathBuf>,
}

impl HelmholtzSolver {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let hcfg = cfg.helmholtz.clone();
        let family = ProblemFamily::from_kind(&cfg.family.to_kind(&hcfg)?, &hcfg)?;
        let mesh = build_annulus_mesh(&hcfg)?;
        let (a, _) = assemble(&vec![0.0; family.dims()], &family, &mesh, &hcfg)?;
        if let Some(dir) = &cfg.output.solutions_dir {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Self {
            nnz: a.nnz(),
            cfg: hcfg,
            family,
            mesh,
            cost: cfg.cost,
            solutions_dir: cfg.output.solutions_dir.clone(),
        })
    }

    pub fn family(&self) -> &ProblemFamily {
        &self.family
    }

    pub fn mesh(&self) -> &AnnulusMesh {
        &self.mesh
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn mode(&self) -> CostMode {
        self.cost.mode
    }

    /// Modeled seconds per factorization and per Krylov iteration.
    pub fn synthetic_times(&self) -> (f64, f64) {
        let nnz = self.nnz as f64;
        (self.cost.c_pc * nnz, self.cost.c_krylov * nnz)
    }

    pub fn system(&self, y: &[f64]) -> Result<(CsrMatrix<f64>, Vec<Complex64>)> {
        assemble(y, &self.family, &self.mesh, &self.cfg)
    }

    /// LU of `A(y)` and its cost in seconds.
    pub fn factor(&self, y: &[f64]) -> Result<(LuPreconditioner<f64>, f64)> {
        let (a, _) = self.system(y)?;
        let p = lu_factor(&a)?.with_source(y.to_vec());
        let t = match self.cost.mode {
            CostMode::Measured => p.build_time(),
            CostMode::Synthetic => self.synthetic_times().0,
        };
        Ok((p, t))
    }

    /// Solves at `y` with `p`; `index` names the persisted solution file.
    pub fn solve(&self, p: &LuPreconditioner<f64>, index: Option<usize>, y: &[f64]) -> Result<PointSolve> {
        let (a, b) = self.system(y)?;
        let r = gmres_left(p, &a, &b, self.cfg.tol, self.cfg.max_iter)?;
        if !r.converged {
            log::warn!("GMRES did not converge at {y:?} after {} iterations", r.iterations);
        }
        if let (Some(dir), Some(i)) = (&self.solutions_dir, index) {
            let out = BufWriter::new(File::create(dir.join(format!("solution_{i:06}.mtx")))?);
            matrix_market::write_vector(&r.solution, out)?;
        }
        let krylov_time = match self.cost.mode {
            CostMode::Measured => r.krylov_time,
            CostMode::Synthetic => self.synthetic_times().1 * r.iterations as f64,
        };
        Ok(PointSolve { iterations: r.iterations, converged: r.converged, krylov_time })
    }
}

/// Training oracle: every solve uses the preconditioner built at the box
/// centre, which stays available afterwards for the execution phase.
pub struct MeanOracle<'a> {
    pub solver: &'a HelmholtzSolver,
    pub mean: Option<(LuPreconditioner<f64>, f64)>,
}

impl<'a> MeanOracle<'a> {
    pub fn new(solver: &'a HelmholtzSolver) -> Self {
        Self { solver, mean: None }
    }

    pub fn ensure_mean(&mut self, ybar: &[f64]) -> Result<(&LuPreconditioner<f64>, f64)> {
        let rebuild = match &self.mean {
            Some((p, _)) => p.source_param() != Some(ybar),
            None => true,
        };
        if rebuild {
            self.mean = Some(self.solver.factor(ybar)?);
        }
        let (p, t) = self.mean.as_ref().expect("just built");
        Ok((p, *t))
    }
}

impl SolveOracle<f64> for MeanOracle<'_> {
    fn prepare(&mut self, ybar: &[f64]) -> Result<f64> {
        Ok(self.ensure_mean(ybar)?.1)
    }

    fn solve(&mut self, index: usize, y: &[f64]) -> Result<OracleSolve> {
        let (p, _) = self.mean.as_ref().expect("prepare runs before solve");
        let r = self.solver.solve(p, Some(index), y)?;
        Ok(OracleSolve { iterations: r.iterations, converged: r.converged, krylov_time: r.krylov_time })
    }
}
