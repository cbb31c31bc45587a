use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::krylov::CostMode;
use crate::surrogate::StopReason;

pub const CSV_HEADER: &str = "N,t_train,t_l_al,t_exec,N_pc,it_av,cost_total,cost_mean_based,cost_per_point";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Pipeline,
    MeanBased,
    PerPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Training,
    Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    /// Index into `W`.
    pub index: usize,
    pub y: Vec<f64>,
    /// Index into `pc_locations` of the preconditioner used.
    pub pc: usize,
    pub phase: Phase,
    pub iterations: usize,
    pub converged: bool,
    /// Surrogate prediction for this point and preconditioner, if any.
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub stop_reason: StopReason,
    pub m_max: f64,
    /// `W` indices in acquisition order.
    pub evaluated: Vec<usize>,
    /// Disagree ratio after each acquisition past the first point.
    pub disagree_trace: Vec<f64>,
    /// Held-out RMSE after each acquisition past the first point.
    pub rmse_trace: Vec<f64>,
    pub holdout_points: usize,
    pub hyperparameters: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementTrace {
    pub greedy_costs: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub la_iterations: usize,
    pub estimated_cost: f64,
}

/// Timings, costs and per-point detail of one run. Costs are in units of
/// Krylov iterations: `N_ratio · N_pc + Σ m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: RunKind,
    pub config: ExperimentConfig,
    pub n_dims: usize,
    pub n_points: usize,
    pub cost_mode: CostMode,
    pub tau_pc: f64,
    pub tau_krylov: f64,
    pub n_ratio: f64,
    pub t_train: f64,
    pub t_l_al: f64,
    pub t_exec: f64,
    pub t_tot: f64,
    pub n_pc: usize,
    pub it_av: f64,
    pub cost_total: f64,
    pub cost_mean_based: Option<f64>,
    pub cost_per_point: f64,
    /// Some solve did not reach the tolerance.
    pub degraded: bool,
    pub pc_locations: Vec<Vec<f64>>,
    /// Preconditioner index for every point of `W`.
    pub assignment: Vec<usize>,
    pub points: Vec<PointRecord>,
    pub training: Option<TrainingTrace>,
    pub placement: Option<PlacementTrace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// Picks the format from the file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

impl RunReport {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n_dims,
            self.t_train,
            self.t_l_al,
            self.t_exec,
            self.n_pc,
            self.it_av,
            self.cost_total,
            opt(self.cost_mean_based),
            self.cost_per_point
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Header and one row per report.
pub fn write_csv<W: Write>(reports: &[RunReport], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn write_report<W: Write>(report: &RunReport, format: ReportFormat, mut out: W) -> Result<()> {
    match format {
        ReportFormat::Csv => write_csv(std::slice::from_ref(report), out),
        ReportFormat::Json => {
            writeln!(out, "{}", report.to_json()?)?;
            Ok(())
        }
    }
}

pub fn emit_report(report: &RunReport, format: ReportFormat, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_report(report, format, &mut out)?;
    out.flush()?;
    Ok(())
}
