//! Gray-box GP surrogate for preconditioned GMRES iteration counts: a GP on
//! the contraction factor `α`, pushed through the Elman iteration estimate.

mod gmap;
mod gp;
mod sp;
mod train;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use gmap::GMap;
pub use gp::{fit_hyperparameters, kernel_eval, kernel_sum, prior_mean, GpState, HyperFit};
pub use sp::SpTracker;
pub use train::{train_surrogate, Holdout, OracleSolve, SolveOracle, StopReason, TrainOptions, TrainingRecord};

/// Posterior means of `α` are clamped into this interval before entering `g`.
pub const ALPHA_MIN: f64 = 1e-14;
pub const ALPHA_MAX: f64 = 1.0 - 1e-9;

pub const SURROGATE_FORMAT_VERSION: u32 = 1;

/// A GP on `α` together with the map to iteration counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Surrogate<T: Real> {
    pub gmap: GMap<T>,
    pub gp: GpState<T>,
}

impl<T: Real> Surrogate<T> {
    fn clamp_alpha(a: T) -> T {
        a.max(T::lit(ALPHA_MIN)).min(T::lit(ALPHA_MAX))
    }

    fn g(&self, alpha: T) -> T {
        self.gmap.g_eval(Self::clamp_alpha(alpha)).expect("clamped alpha lies in (0, 1)")
    }

    /// Predicted iteration count for the shift `delta`, floored at one.
    pub fn eval_m(&self, delta: &[T]) -> Result<T> {
        let mean = self.gp.posterior_mean(delta)?;
        Ok(self.g(mean).max(T::one()))
    }

    /// Variance-to-cost ratio `V[g]/E[g]`, or `−∞` above the cutoff `m_max`.
    /// `V[g]` uses the central difference `(g(E+V) − g(E−V))/2` in `α`.
    pub fn acquisition(&self, delta: &[T], m_max: T) -> Result<T> {
        let (mean, var) = self.gp.posterior(delta)?;
        let e = Self::clamp_alpha(mean);
        let expected = self.g(e).max(T::one());
        if expected > m_max {
            return Ok(T::neg_infinity());
        }
        let spread = (self.g(e + var) - self.g(e - var)) / T::lit(2.0);
        Ok(spread / expected)
    }
}

/// Outcome of the training loop, reusable across runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrainedSurrogate<T: Real> {
    pub version: u32,
    pub surrogate: Surrogate<T>,
    /// Centre of the parameter box; the GP works on shifts from it.
    pub ybar: Vec<T>,
    pub m_max: T,
    /// Indices into `W` solved during training, in order.
    pub evaluated: Vec<usize>,
    pub records: Vec<TrainingRecord>,
    pub tau_pc: f64,
    pub tau_krylov: f64,
    pub sp: SpTracker<T>,
    /// Held-out RMSE after each acquisition, if a holdout set was supplied.
    pub rmse_trace: Vec<T>,
    pub stop_reason: StopReason,
}

impl<T: Real> TrainedSurrogate<T> {
    pub fn eval_m(&self, delta: &[T]) -> Result<T> {
        self.surrogate.eval_m(delta)
    }

    pub fn acquisition(&self, delta: &[T]) -> Result<T> {
        self.surrogate.acquisition(delta, self.m_max)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let mut s: Self = serde_json::from_reader(input)?;
        if s.version != SURROGATE_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "surrogate format version {} is not supported (expected {SURROGATE_FORMAT_VERSION})",
                s.version
            )));
        }
        s.surrogate.gp.refactor()?;
        Ok(s)
    }
}
