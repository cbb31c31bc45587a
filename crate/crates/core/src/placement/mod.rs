//! Preconditioner placement: greedy initialization with automatic choice of
//! the number of preconditioners, refined by location-allocation under the
//! surrogate iteration metric.

mod weber;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param_space::ParamSet;
use crate::scalar::Real;

pub use weber::{cell_objective, locate, Located};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PlacementPlan<T: Real> {
    pub pc_locations: Vec<Vec<T>>,
    /// Preconditioner index for every point of `W`.
    pub assignment: Vec<usize>,
    pub estimated_cost: T,
    pub fixed_mask: Vec<bool>,
    /// Estimated cost after each greedy addition, starting with the seed set.
    pub greedy_costs: Vec<T>,
    /// `Σ m` at the start and after every location-allocation iteration.
    pub objective_trace: Vec<T>,
    pub la_iterations: usize,
}

impl<T: Real> PlacementPlan<T> {
    pub fn n_pc(&self) -> usize {
        self.pc_locations.len()
    }

    /// Point indices served by each preconditioner.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.n_pc()];
        for (i, &k) in self.assignment.iter().enumerate() {
            cells[k].push(i);
        }
        cells
    }
}

/// When to stop alternating allocation and location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LoopGuard {
    /// Deterministic: iteration cap and relative-improvement floor.
    Synthetic { max_iterations: usize, rel_improvement_floor: f64 },
    /// Stop once the cost gain of an iteration is worth less than the time
    /// it took, measured in Krylov iterations and scaled by `kappa`.
    Measured { kappa: f64, tau_krylov: f64, max_iterations: usize },
}

impl Default for LoopGuard {
    fn default() -> Self {
        LoopGuard::Synthetic { max_iterations: 50, rel_improvement_floor: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementOptions {
    /// Starts per Weber solve, including the incumbent and the centroid.
    pub starts: usize,
    pub guard: LoopGuard,
    pub seed: u64,
}

impl Default for PlacementOptions {
    fn default() -> Self {
        Self { starts: 5, guard: LoopGuard::default(), seed: 0 }
    }
}

fn shift<T: Real>(y: &[T], c: &[T], out: &mut [T]) {
    for ((o, &a), &b) in out.iter_mut().zip(y).zip(c) {
        *o = a - b;
    }
}

/// `N_ratio · N_pc + Σ_j m(y_j − ŷ(y_j))` for the plan's assignment.
pub fn tau_est<T: Real, M>(w: &ParamSet<T>, plan: &PlacementPlan<T>, m: &M, n_ratio: T) -> Result<T>
where
    M: Fn(&[T]) -> Result<T> + ?Sized,
{
    if plan.assignment.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: w.len(), got: plan.assignment.len() });
    }
    let mut buf = vec![T::zero(); w.dims()];
    let mut total = n_ratio * T::from_usize_lossy(plan.n_pc());
    for (i, &k) in plan.assignment.iter().enumerate() {
        shift(w.point(i), &plan.pc_locations[k], &mut buf);
        total += m(&buf)?;
    }
    Ok(total)
}

/// Assigns each point to the preconditioner with the fewest predicted
/// iterations, ties to the lowest index. Returns the assignment and the
/// per-point values.
pub fn allocate<T: Real, M>(w: &ParamSet<T>, pcs: &[Vec<T>], m: &M) -> Result<(Vec<usize>, Vec<T>)>
where
    M: Fn(&[T]) -> Result<T> + ?Sized,
{
    if pcs.is_empty() {
        return Err(Error::InvalidArgument("allocation needs at least one preconditioner".into()));
    }
    let mut buf = vec![T::zero(); w.dims()];
    let mut assign = Vec::with_capacity(w.len());
    let mut vals = Vec::with_capacity(w.len());
    for (_, y) in w.iter() {
        let mut best = (0, T::infinity());
        for (k, c) in pcs.iter().enumerate() {
            shift(y, c, &mut buf);
            let v = m(&buf)?;
            if v < best.1 {
                best = (k, v);
            }
        }
        assign.push(best.0);
        vals.push(best.1);
    }
    Ok((assign, vals))
}

/// Index into a greedy cost sequence at which to stop: the state before the
/// first pair of consecutive cost increases, or `None` while there is none.
pub fn greedy_stop<T: Real>(costs: &[T]) -> Option<usize> {
    let mut rises = 0;
    for k in 1..costs.len() {
        if costs[k] > costs[k - 1] {
            rises += 1;
            if rises == 2 {
                return Some(k - 2);
            }
        } else {
            rises = 0;
        }
    }
    None
}

/// Greedy initialization followed by location-allocation. Fixed
/// preconditioners never move and are never removed; without any, the
/// greedy phase is seeded at the box centre.
pub fn plan_placement<T: Real, M>(
    w: &ParamSet<T>,
    m: &M,
    n_ratio: T,
    pc_fixed: &[Vec<T>],
    opts: &PlacementOptions,
) -> Result<PlacementPlan<T>>
where
    M: Fn(&[T]) -> Result<T> + ?Sized,
{
    if w.is_empty() {
        return Err(Error::InvalidArgument("placement needs a nonempty parameter set".into()));
    }
    if pc_fixed.iter().any(|p| p.len() != w.dims()) {
        return Err(Error::DimensionMismatch { expected: w.dims(), got: pc_fixed[0].len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pcs: Vec<Vec<T>> = if pc_fixed.is_empty() { vec![w.bounds().center()] } else { pc_fixed.to_vec() };
    let mut fixed = vec![!pc_fixed.is_empty(); pcs.len()];
    let cost_of = |n_pc: usize, vals: &[T]| n_ratio * T::from_usize_lossy(n_pc) + vals.iter().copied().sum::<T>();

    // greedy phase
    let (_, mut vals) = allocate(w, &pcs, m)?;
    let mut greedy_costs = vec![cost_of(pcs.len(), &vals)];
    let mut used = vec![false; w.len()];
    let seeds = pcs.len();
    let mut buf = vec![T::zero(); w.dims()];
    let keep = loop {
        if let Some(k) = greedy_stop(&greedy_costs) {
            break k;
        }
        let mut pick = None;
        for i in 0..w.len() {
            if !used[i] && pick.is_none_or(|p: usize| vals[i] > vals[p]) {
                pick = Some(i);
            }
        }
        let Some(i) = pick else {
            break greedy_costs.len() - 1;
        };
        used[i] = true;
        let site = w.point(i).to_vec();
        for (j, y) in w.iter() {
            shift(y, &site, &mut buf);
            let v = m(&buf)?;
            if v < vals[j] {
                vals[j] = v;
            }
        }
        pcs.push(site);
        fixed.push(false);
        greedy_costs.push(cost_of(pcs.len(), &vals));
    };
    pcs.truncate(seeds + keep);
    fixed.truncate(seeds + keep);
    log::debug!("greedy phase kept {} preconditioners", pcs.len());

    // location-allocation phase
    let (mut assign, mut vals) = allocate(w, &pcs, m)?;
    let sum = |v: &[T]| v.iter().copied().sum::<T>();
    let mut objective_trace = vec![sum(&vals)];
    let mut cost = cost_of(pcs.len(), &vals);
    let (max_iterations, mut iterations) = match opts.guard {
        LoopGuard::Synthetic { max_iterations, .. } | LoopGuard::Measured { max_iterations, .. } => (max_iterations, 0),
    };
    while iterations < max_iterations {
        let start = Instant::now();
        iterations += 1;
        relocate_orphans(w, m, n_ratio, &mut pcs, &mut fixed, &mut assign, &mut vals)?;

        let mut cells = vec![Vec::new(); pcs.len()];
        for (i, &k) in assign.iter().enumerate() {
            cells[k].push(w.point(i));
        }
        for (k, cell) in cells.iter().enumerate() {
            if fixed[k] || cell.is_empty() {
                continue;
            }
            let found = locate(cell, m, w.bounds(), &pcs[k], opts.starts, &mut rng)?;
            if found.improved {
                pcs[k] = found.point;
            }
        }
        let (new_assign, new_vals) = allocate(w, &pcs, m)?;
        let changed = new_assign != assign;
        assign = new_assign;
        vals = new_vals;
        objective_trace.push(sum(&vals));
        let new_cost = cost_of(pcs.len(), &vals);
        let gain = cost - new_cost;
        let prev = cost;
        cost = new_cost;
        if !changed {
            break;
        }
        let stop = match opts.guard {
            LoopGuard::Synthetic { rel_improvement_floor, .. } => gain < T::lit(rel_improvement_floor) * prev.abs(),
            LoopGuard::Measured { kappa, tau_krylov, .. } => {
                gain < T::lit(kappa * start.elapsed().as_secs_f64() / tau_krylov)
            }
        };
        if stop {
            break;
        }
    }
    // a final pass so no preconditioner is left without points
    relocate_orphans(w, m, n_ratio, &mut pcs, &mut fixed, &mut assign, &mut vals)?;
    let estimated_cost = cost_of(pcs.len(), &vals);
    Ok(PlacementPlan {
        pc_locations: pcs,
        assignment: assign,
        estimated_cost,
        fixed_mask: fixed,
        greedy_costs,
        objective_trace,
        la_iterations: iterations,
    })
}

/// A movable preconditioner that serves no point is moved to the worst
/// served point when that lowers `Σ m` by more than it costs, and dropped
/// otherwise.
fn relocate_orphans<T: Real, M>(
    w: &ParamSet<T>,
    m: &M,
    n_ratio: T,
    pcs: &mut Vec<Vec<T>>,
    fixed: &mut Vec<bool>,
    assign: &mut Vec<usize>,
    vals: &mut Vec<T>,
) -> Result<()>
where
    M: Fn(&[T]) -> Result<T> + ?Sized,
{
    let mut k = 0;
    while k < pcs.len() {
        if fixed[k] || assign.contains(&k) {
            k += 1;
            continue;
        }
        let mut worst = 0;
        for i in 1..vals.len() {
            if vals[i] > vals[worst] {
                worst = i;
            }
        }
        let old = std::mem::replace(&mut pcs[k], w.point(worst).to_vec());
        let (a, v) = allocate(w, pcs, m)?;
        let before: T = vals.iter().copied().sum();
        if v.iter().copied().sum::<T>() + n_ratio < before {
            *assign = a;
            *vals = v;
            k += 1;
        } else {
            pcs[k] = old;
            pcs.remove(k);
            fixed.remove(k);
            for a in assign.iter_mut() {
                if *a > k {
                    *a -= 1;
                }
            }
        }
    }
    Ok(())
}
