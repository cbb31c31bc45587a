//! Experiment pipeline: configuration, sampling of `W`, the end-to-end run
//! (train, place, execute), the two baselines and report output.

mod config;
mod pipeline;
mod report;
mod sample;
mod solver;

pub use config::{CostSpec, ExperimentConfig, FamilySpec, OutputSpec, PlacementSpec, Sampling, TrainingSpec};
pub use pipeline::{
    baseline_mean_based, baseline_mean_based_on, baseline_per_point, baseline_per_point_on, run_pipeline,
    run_pipeline_on, Experiment, Placement,
};
pub use report::{
    emit_report, write_csv, write_report, Phase, PlacementTrace, PointRecord, ReportFormat, RunKind, RunReport,
    TrainingTrace, CSV_HEADER,
};
pub use sample::{sample_points, sample_w, HALTON_MAX_DIMS};
pub use solver::{HelmholtzSolver, MeanOracle, PointSolve};
