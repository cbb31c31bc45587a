use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Wall-clock seconds from the actual factorizations and solves.
    Measured,
    /// Deterministic seconds proportional to the number of nonzeros.
    Synthetic,
}

/// Per-preconditioner and per-iteration costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub tau_pc: f64,
    pub tau_krylov: f64,
    pub mode: CostMode,
}

impl CostModel {
    pub fn measured(tau_pc: f64, tau_krylov: f64) -> Result<Self> {
        Self::checked(tau_pc, tau_krylov, CostMode::Measured)
    }

    /// `tau_pc = c_pc · nnz`, `tau_krylov = c_krylov · nnz`.
    pub fn synthetic(c_pc: f64, c_krylov: f64, nnz: usize) -> Result<Self> {
        let nnz = nnz.max(1) as f64;
        Self::checked(c_pc * nnz, c_krylov * nnz, CostMode::Synthetic)
    }

    fn checked(tau_pc: f64, tau_krylov: f64, mode: CostMode) -> Result<Self> {
        if !(tau_pc > 0.0 && tau_krylov > 0.0) || !tau_pc.is_finite() || !tau_krylov.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cost model needs positive finite times, got tau_pc = {tau_pc}, tau_krylov = {tau_krylov}"
            )));
        }
        Ok(Self { tau_pc, tau_krylov, mode })
    }

    /// Break-even number of Krylov iterations for one extra preconditioner.
    pub fn n_ratio(&self) -> f64 {
        self.tau_pc / self.tau_krylov
    }
}
