use std::time::Instant;

use super::config::{ExperimentConfig, Sampling};
use super::report::{Phase, PlacementTrace, PointRecord, RunKind, RunReport, TrainingTrace};
use super::sample::{sample_points, sample_w};
use super::solver::{HelmholtzSolver, MeanOracle};
use crate::error::Result;
use crate::krylov::CostMode;
use crate::param_space::ParamSet;
use crate::placement::{plan_placement, LoopGuard, PlacementOptions, PlacementPlan};
use crate::surrogate::{train_surrogate, GMap, Holdout, TrainOptions, TrainedSurrogate};

/// Seed offset for held-out points so they never coincide with `W`.
const HOLDOUT_SALT: u64 = 0x6a09_e667_f3bc_c908;

/// A validated config together with its solver and parameter set.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub solver: HelmholtzSolver,
    pub w: ParamSet<f64>,
}

/// Placement over the points left after training.
#[derive(Debug, Clone)]
pub struct Placement {
    pub plan: PlacementPlan<f64>,
    /// `W` indices of the placed points, aligned with `plan.assignment`.
    pub remaining: Vec<usize>,
    pub wall_time: f64,
}

impl Experiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let solver = HelmholtzSolver::new(config)?;
        let w = sample_w(config.n_points, config.family.dims(), config.sampling, config.seed)?;
        Ok(Self { config: config.clone(), solver, w })
    }

    fn ybar(&self) -> Vec<f64> {
        self.w.bounds().center()
    }

    fn holdout(&self, oracle: &mut MeanOracle<'_>) -> Result<Option<Holdout<f64>>> {
        let n = self.config.training.holdout_points;
        if n == 0 {
            return Ok(None);
        }
        let points = sample_points(n, self.w.dims(), Sampling::Uniform, self.config.seed ^ HOLDOUT_SALT)?;
        let (p, _) = oracle.ensure_mean(&self.ybar())?;
        let mut iterations = Vec::with_capacity(n);
        for y in &points {
            iterations.push(self.solver.solve(p, None, y)?.iterations as f64);
        }
        Ok(Some(Holdout { points, iterations }))
    }

    /// Runs the active-learning loop; every solve goes through `oracle`.
    pub fn train_with(&self, oracle: &mut MeanOracle<'_>) -> Result<TrainedSurrogate<f64>> {
        let family = self.solver.family();
        let opts = TrainOptions { sp_window: self.config.training.sp_window, holdout: self.holdout(oracle)? };
        train_surrogate(
            &self.w,
            family.b(),
            family.d(),
            &family.reference_profile().corr_lengths,
            GMap::new(self.config.helmholtz.tol)?,
            oracle,
            &opts,
        )
    }

    pub fn train(&self) -> Result<TrainedSurrogate<f64>> {
        self.train_with(&mut MeanOracle::new(&self.solver))
    }

    /// Places preconditioners for the points not solved during training,
    /// keeping the training preconditioner at the centre.
    pub fn place(&self, trained: &TrainedSurrogate<f64>) -> Result<Option<Placement>> {
        let mut seen = vec![false; self.w.len()];
        for &i in &trained.evaluated {
            seen[i] = true;
        }
        let remaining: Vec<usize> = (0..self.w.len()).filter(|&i| !seen[i]).collect();
        if remaining.is_empty() {
            return Ok(None);
        }
        let rest = ParamSet::new(self.w.bounds().clone(), remaining.iter().map(|&i| self.w.point(i).to_vec()).collect())?;
        let p = &self.config.placement;
        let guard = match self.solver.mode() {
            CostMode::Synthetic => LoopGuard::Synthetic {
                max_iterations: p.max_iterations,
                rel_improvement_floor: p.rel_improvement_floor,
            },
            CostMode::Measured => LoopGuard::Measured {
                kappa: p.kappa,
                tau_krylov: trained.tau_krylov,
                max_iterations: p.max_iterations,
            },
        };
        let opts = PlacementOptions { starts: p.starts, guard, seed: self.config.seed };
        let m = |d: &[f64]| trained.eval_m(d);
        let start = Instant::now();
        let plan = plan_placement(&rest, &m, trained.m_max, std::slice::from_ref(&trained.ybar), &opts)?;
        Ok(Some(Placement { plan, remaining, wall_time: start.elapsed().as_secs_f64() }))
    }

    fn shell(&self, kind: RunKind, tau_pc: f64, tau_krylov: f64) -> RunReport {
        let n_ratio = match self.solver.mode() {
            CostMode::Synthetic => self.config.cost.c_pc / self.config.cost.c_krylov,
            CostMode::Measured => tau_pc / tau_krylov,
        };
        let n = self.w.len() as f64;
        RunReport {
            kind,
            config: self.config.clone(),
            n_dims: self.w.dims(),
            n_points: self.w.len(),
            cost_mode: self.solver.mode(),
            tau_pc,
            tau_krylov,
            n_ratio,
            t_train: 0.0,
            t_l_al: 0.0,
            t_exec: 0.0,
            t_tot: 0.0,
            n_pc: 0,
            it_av: 0.0,
            cost_total: 0.0,
            cost_mean_based: None,
            cost_per_point: n * (n_ratio + 1.0),
            degraded: false,
            pc_locations: Vec::new(),
            assignment: Vec::new(),
            points: Vec::new(),
            training: None,
            placement: None,
        }
    }
}

fn finish(mut r: RunReport) -> RunReport {
    r.points.sort_by_key(|p| p.index);
    r.assignment = r.points.iter().map(|p| p.pc).collect();
    let total: usize = r.points.iter().map(|p| p.iterations).sum();
    r.it_av = total as f64 / r.points.len().max(1) as f64;
    r.degraded = r.points.iter().any(|p| !p.converged);
    r.n_pc = r.pc_locations.len();
    r.t_tot = r.t_train + r.t_l_al + r.t_exec;
    r
}

/// Per-iteration time from a batch of solves; falls back to the synthetic
/// constant when no iteration was timed.
fn per_iteration(solver: &HelmholtzSolver, time: f64, iterations: usize) -> f64 {
    if iterations > 0 && time > 0.0 {
        time / iterations as f64
    } else {
        solver.synthetic_times().1
    }
}

/// Train the surrogate on `W`, place preconditioners on the rest with the
/// centre preconditioner kept, and solve every remaining point once.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunReport> {
    let ex = Experiment::new(cfg)?;
    run_pipeline_on(&ex)
}

pub fn run_pipeline_on(ex: &Experiment) -> Result<RunReport> {
    let solver = &ex.solver;
    let mut oracle = MeanOracle::new(solver);
    let trained = ex.train_with(&mut oracle)?;
    let (mean_pc, tau_mean) = oracle.ensure_mean(&trained.ybar)?;

    let tau_krylov = if trained.tau_krylov > 0.0 { trained.tau_krylov } else { solver.synthetic_times().1 };
    let mut report = ex.shell(RunKind::Pipeline, trained.tau_pc, tau_krylov);
    // recorded training solves, in the order they happened
    let mut t_train = tau_mean;
    for rec in &trained.records {
        t_train += tau_krylov * rec.iterations as f64;
        report.points.push(PointRecord {
            index: rec.index,
            y: ex.w.point(rec.index).to_vec(),
            pc: 0,
            phase: Phase::Training,
            iterations: rec.iterations,
            converged: rec.converged,
            predicted: None,
        });
    }
    report.t_train = t_train;
    report.training = Some(TrainingTrace {
        stop_reason: trained.stop_reason,
        m_max: trained.m_max,
        evaluated: trained.evaluated.clone(),
        disagree_trace: trained.sp.history.clone(),
        rmse_trace: trained.rmse_trace.clone(),
        holdout_points: ex.config.training.holdout_points,
        hyperparameters: trained.surrogate.gp.c,
    });

    let placement = ex.place(&trained)?;
    report.pc_locations = vec![trained.ybar.clone()];
    let mut mean_counts = vec![None; ex.w.len()];
    for p in &report.points {
        mean_counts[p.index] = Some(p.iterations);
    }
    if let Some(pl) = &placement {
        let plan = &pl.plan;
        report.t_l_al = match solver.mode() {
            CostMode::Measured => pl.wall_time,
            CostMode::Synthetic => 0.0,
        };
        report.pc_locations = plan.pc_locations.clone();
        report.placement = Some(PlacementTrace {
            greedy_costs: plan.greedy_costs.clone(),
            objective_trace: plan.objective_trace.clone(),
            la_iterations: plan.la_iterations,
            estimated_cost: plan.estimated_cost,
        });
        let mut t_exec = 0.0;
        for (k, cell) in plan.cells().iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            let site = &plan.pc_locations[k];
            let built;
            let p = if plan.fixed_mask[k] {
                mean_pc
            } else {
                let (lu, t) = solver.factor(site)?;
                t_exec += t;
                built = lu;
                &built
            };
            for &j in cell {
                let index = pl.remaining[j];
                let y = ex.w.point(index);
                let r = solver.solve(p, Some(index), y)?;
                t_exec += r.krylov_time;
                if plan.fixed_mask[k] {
                    mean_counts[index] = Some(r.iterations);
                }
                let delta: Vec<f64> = y.iter().zip(site).map(|(a, b)| a - b).collect();
                report.points.push(PointRecord {
                    index,
                    y: y.to_vec(),
                    pc: k,
                    phase: Phase::Execution,
                    iterations: r.iterations,
                    converged: r.converged,
                    predicted: Some(trained.eval_m(&delta)?),
                });
            }
            log::debug!("preconditioner {k} served {} points", cell.len());
        }
        report.t_exec = t_exec;
    }
    let mut report = finish(report);
    report.cost_total = report.n_ratio * report.n_pc as f64 + report.points.iter().map(|p| p.iterations as f64).sum::<f64>();

    if ex.config.compare_baselines {
        let mut sum = 0usize;
        for (i, c) in mean_counts.iter().enumerate() {
            sum += match c {
                Some(m) => *m,
                None => solver.solve(mean_pc, None, ex.w.point(i))?.iterations,
            };
        }
        report.cost_mean_based = Some(report.n_ratio + sum as f64);
    }
    Ok(report)
}

/// Every point solved with the single preconditioner at the centre.
pub fn baseline_mean_based(cfg: &ExperimentConfig) -> Result<RunReport> {
    baseline_mean_based_on(&Experiment::new(cfg)?)
}

pub fn baseline_mean_based_on(ex: &Experiment) -> Result<RunReport> {
    let solver = &ex.solver;
    let ybar = ex.ybar();
    let (p, tau_pc) = solver.factor(&ybar)?;
    let mut points = Vec::with_capacity(ex.w.len());
    let mut t_krylov = 0.0;
    for (index, y) in ex.w.iter() {
        let r = solver.solve(&p, Some(index), y)?;
        t_krylov += r.krylov_time;
        points.push(PointRecord {
            index,
            y: y.to_vec(),
            pc: 0,
            phase: Phase::Execution,
            iterations: r.iterations,
            converged: r.converged,
            predicted: None,
        });
    }
    let total: usize = points.iter().map(|p| p.iterations).sum();
    let mut report = ex.shell(RunKind::MeanBased, tau_pc, per_iteration(solver, t_krylov, total));
    report.t_exec = tau_pc + t_krylov;
    report.pc_locations = vec![ybar];
    report.points = points;
    let mut report = finish(report);
    report.cost_total = report.n_ratio + total as f64;
    report.cost_mean_based = Some(report.cost_total);
    Ok(report)
}

/// One exact preconditioner per point.
pub fn baseline_per_point(cfg: &ExperimentConfig) -> Result<RunReport> {
    baseline_per_point_on(&Experiment::new(cfg)?)
}

pub fn baseline_per_point_on(ex: &Experiment) -> Result<RunReport> {
    let solver = &ex.solver;
    let mut points = Vec::with_capacity(ex.w.len());
    let (mut t_pc, mut t_krylov) = (0.0, 0.0);
    for (index, y) in ex.w.iter() {
        let (p, t) = solver.factor(y)?;
        let r = solver.solve(&p, Some(index), y)?;
        t_pc += t;
        t_krylov += r.krylov_time;
        points.push(PointRecord {
            index,
            y: y.to_vec(),
            pc: index,
            phase: Phase::Execution,
            iterations: r.iterations,
            converged: r.converged,
            predicted: None,
        });
    }
    let total: usize = points.iter().map(|p| p.iterations).sum();
    let tau_pc = t_pc / ex.w.len() as f64;
    let mut report = ex.shell(RunKind::PerPoint, tau_pc, per_iteration(solver, t_krylov, total));
    report.t_exec = t_pc + t_krylov;
    report.pc_locations = ex.w.points().to_vec();
    report.points = points;
    let mut report = finish(report);
    report.cost_total = report.cost_per_point;
    Ok(report)
}
