use serde::{Deserialize, Serialize};

use super::{GMap, GpState, Surrogate, SpTracker, TrainedSurrogate, SURROGATE_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::param_space::{weighted_norm, ParamSet, WeightMatrix};
use crate::scalar::Real;

/// Outcome of one solve requested by the training loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSolve {
    pub iterations: usize,
    pub converged: bool,
    /// Seconds spent in the Krylov iteration (measured or modeled).
    pub krylov_time: f64,
}

/// Source of true iteration counts for training. `solve` must use the
/// preconditioner built by the preceding `prepare`.
pub trait SolveOracle<T: Real> {
    /// Builds the preconditioner at `ybar`; returns its cost in seconds.
    fn prepare(&mut self, ybar: &[T]) -> Result<f64>;
    fn solve(&mut self, index: usize, y: &[T]) -> Result<OracleSolve>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Stabilized,
    BudgetExhausted,
    /// Every remaining candidate was predicted above the cost cutoff.
    NoAdmissibleCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub index: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Points with known iteration counts used to trace the surrogate error.
#[derive(Debug, Clone)]
pub struct Holdout<T: Real> {
    pub points: Vec<Vec<T>>,
    pub iterations: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct TrainOptions<T: Real> {
    pub sp_window: usize,
    pub holdout: Option<Holdout<T>>,
}

impl<T: Real> Default for TrainOptions<T> {
    fn default() -> Self {
        Self { sp_window: 5, holdout: None }
    }
}

struct Book {
    evaluated: Vec<usize>,
    done: Vec<bool>,
    records: Vec<TrainingRecord>,
    tau_tot: f64,
    m_tot: usize,
}

impl Book {
    /// Solves at `idx`, records the cost and adds `(Δ, g⁻¹(m))` to the GP.
    fn observe<T: Real, O: SolveOracle<T> + ?Sized>(
        &mut self,
        oracle: &mut O,
        s: &mut Surrogate<T>,
        w: &ParamSet<T>,
        deltas: &[Vec<T>],
        idx: usize,
    ) -> Result<()> {
        let r = oracle.solve(idx, w.point(idx))?;
        self.tau_tot += r.krylov_time;
        self.m_tot += r.iterations;
        self.records.push(TrainingRecord { index: idx, iterations: r.iterations, converged: r.converged });
        self.evaluated.push(idx);
        self.done[idx] = true;
        // a zero-iteration solve (vanishing right-hand side) is treated as one
        let m = T::from_usize_lossy(r.iterations.max(1));
        s.gp.push(deltas[idx].clone(), s.gmap.g_inv(m)?)?;
        s.gp.refit()
    }
}

fn rmse<T: Real>(s: &Surrogate<T>, ybar: &[T], h: &Holdout<T>) -> Result<T> {
    let mut acc = T::zero();
    for (y, &m) in h.points.iter().zip(&h.iterations) {
        let delta: Vec<T> = y.iter().zip(ybar).map(|(&a, &b)| a - b).collect();
        let e = s.eval_m(&delta)? - m;
        acc += e * e;
    }
    Ok((acc / T::from_usize_lossy(h.points.len().max(1))).sqrt())
}

/// Active-learning loop for the iteration surrogate. All solves use one
/// preconditioner built at the box centre; the next point maximizes the
/// variance-to-cost ratio among points predicted below the break-even
/// count, and training stops once successive predictions over `W` agree.
pub fn train_surrogate<T: Real, O: SolveOracle<T> + ?Sized>(
    w: &ParamSet<T>,
    b: &WeightMatrix<T>,
    d: &WeightMatrix<T>,
    corr_lengths: &[T],
    gmap: GMap<T>,
    oracle: &mut O,
    opts: &TrainOptions<T>,
) -> Result<TrainedSurrogate<T>> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("training needs a nonempty parameter set".into()));
    }
    if let Some(h) = &opts.holdout {
        if h.points.len() != h.iterations.len() {
            return Err(Error::DimensionMismatch { expected: h.points.len(), got: h.iterations.len() });
        }
    }
    let ybar = w.bounds().center();
    let shift = |y: &[T]| -> Vec<T> { y.iter().zip(&ybar).map(|(&a, &c)| a - c).collect() };
    let deltas: Vec<Vec<T>> = w.points().iter().map(|y| shift(y)).collect();

    let tau_pc = oracle.prepare(&ybar)?;
    let mut gp = GpState::new(corr_lengths.to_vec(), b.clone(), d.clone())?;
    let n = w.dims();
    gp.push(vec![T::zero(); n], gmap.g_inv(T::one())?)?;
    let mut s = Surrogate { gmap, gp };

    let mut book = Book { evaluated: Vec::new(), done: vec![false; w.len()], records: Vec::new(), tau_tot: 0.0, m_tot: 0 };

    // first real evaluation: smallest prior mean at unit hyperparameters
    let mut first = 0;
    let mut best = T::infinity();
    for (i, dl) in deltas.iter().enumerate() {
        let v = weighted_norm(dl, d)? + weighted_norm(dl, b)?;
        if v < best {
            best = v;
            first = i;
        }
    }
    book.observe(oracle, &mut s, w, &deltas, first)?;

    let predict = |s: &Surrogate<T>| -> Result<Vec<T>> { deltas.iter().map(|dl| s.eval_m(dl)).collect() };
    let mut m_old = predict(&s)?;
    let mut sp = SpTracker::new(opts.sp_window)?;
    let mut rmse_trace = Vec::new();
    let break_even = |b: &Book| -> Option<T> {
        (b.m_tot > 0 && b.tau_tot > 0.0).then(|| T::lit(tau_pc * b.m_tot as f64 / b.tau_tot))
    };

    let stop_reason = loop {
        if book.evaluated.len() == w.len() {
            break StopReason::BudgetExhausted;
        }
        let cutoff = break_even(&book).unwrap_or_else(T::infinity);
        let mut pick = None;
        let mut best = T::neg_infinity();
        for (i, dl) in deltas.iter().enumerate() {
            if book.done[i] {
                continue;
            }
            let a = s.acquisition(dl, cutoff)?;
            if a > best {
                best = a;
                pick = Some(i);
            }
        }
        let Some(idx) = pick else {
            break StopReason::NoAdmissibleCandidate;
        };
        book.observe(oracle, &mut s, w, &deltas, idx)?;
        let m_new = predict(&s)?;
        let stop = sp.update(&m_old, &m_new)?;
        if let Some(h) = &opts.holdout {
            rmse_trace.push(rmse(&s, &ybar, h)?);
        }
        m_old = m_new;
        if stop {
            break StopReason::Stabilized;
        }
    };

    let tau_krylov = if book.m_tot > 0 { book.tau_tot / book.m_tot as f64 } else { 0.0 };
    // without any Krylov work the break-even count is unknown; fall back to
    // the smallest meaningful value
    let m_max = break_even(&book).unwrap_or_else(T::one);
    log::info!(
        "training stopped ({stop_reason:?}) after {} solves, m_max = {m_max}, C = {:?}",
        book.evaluated.len(),
        s.gp.c
    );
    Ok(TrainedSurrogate {
        version: SURROGATE_FORMAT_VERSION,
        surrogate: s,
        ybar,
        m_max,
        evaluated: book.evaluated,
        records: book.records,
        tau_pc,
        tau_krylov,
        sp,
        rmse_trace,
        stop_reason,
    })
}
