use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use preconplace::harness::{
    baseline_mean_based_on, baseline_per_point_on, run_pipeline_on, write_csv, write_report, Experiment,
    ExperimentConfig, ReportFormat, RunReport,
};
use preconplace::krylov::CostMode;
use preconplace::surrogate::TrainedSurrogate;

#[derive(Parser)]
#[command(name = "preconplace", version, about = "Surrogate-driven placement of LU preconditioners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the cost model in the config.
    #[arg(long, value_enum)]
    cost_mode: Option<Mode>,
    /// Output file; `.csv` selects CSV for reports. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Measured,
    Synthetic,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineKind {
    Mean,
    PerPoint,
}

#[derive(Subcommand)]
enum Command {
    /// Train the iteration surrogate and write it as JSON.
    Train(Common),
    /// Place preconditioners for the points a trained surrogate has not solved.
    Place {
        #[command(flatten)]
        common: Common,
        /// Surrogate written by `train` for the same config and seed.
        #[arg(long)]
        surrogate: PathBuf,
    },
    /// Train, place and solve every point; writes a run report.
    Run(Common),
    /// Solve every point with a single strategy.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: BaselineKind,
    },
    /// Convert JSON run reports into one CSV table.
    Report {
        /// JSON reports, one table row each.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn load(common: &Common) -> AnyResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&common.config)
        .map_err(|e| format!("{}: {e}", common.config.display()))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = common.cost_mode {
        cfg.cost.mode = match mode {
            Mode::Measured => CostMode::Measured,
            Mode::Synthetic => CostMode::Synthetic,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(path: Option<&Path>) -> AnyResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| format!("{}: {e}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes the report to `--out` (or stdout) and to any paths in the config.
fn publish(report: &RunReport, common: &Common) -> AnyResult<bool> {
    let format = common.out.as_deref().map_or(ReportFormat::Json, ReportFormat::from_path);
    let mut out = sink(common.out.as_deref())?;
    write_report(report, format, &mut out)?;
    out.flush()?;
    if let Some(p) = &report.config.output.json {
        write_report(report, ReportFormat::Json, BufWriter::new(File::create(p)?))?;
    }
    if let Some(p) = &report.config.output.csv {
        write_report(report, ReportFormat::Csv, BufWriter::new(File::create(p)?))?;
    }
    if report.degraded {
        log::warn!("some solves did not converge; see the per-point records");
    }
    Ok(report.degraded)
}

fn execute(cli: Cli) -> AnyResult<bool> {
    match cli.command {
        Command::Train(common) => {
            let ex = Experiment::new(&load(&common)?)?;
            let trained = ex.train()?;
            let degraded = trained.records.iter().any(|r| !r.converged);
            let mut out = sink(common.out.as_deref())?;
            trained.write_json(&mut out)?;
            writeln!(out)?;
            Ok(degraded)
        }
        Command::Place { common, surrogate } => {
            let ex = Experiment::new(&load(&common)?)?;
            let file = File::open(&surrogate).map_err(|e| format!("{}: {e}", surrogate.display()))?;
            let trained = TrainedSurrogate::<f64>::read_json(io::BufReader::new(file))?;
            if trained.ybar.len() != ex.w.dims() || trained.evaluated.iter().any(|&i| i >= ex.w.len()) {
                return Err("surrogate was trained for a different parameter set".into());
            }
            let mut out = sink(common.out.as_deref())?;
            match ex.place(&trained)? {
                Some(p) => {
                    let doc = serde_json::json!({ "remaining": p.remaining, "plan": p.plan });
                    serde_json::to_writer_pretty(&mut out, &doc)?;
                }
                None => serde_json::to_writer_pretty(&mut out, &serde_json::json!({ "remaining": [], "plan": null }))?,
            }
            writeln!(out)?;
            Ok(false)
        }
        Command::Run(common) => {
            let ex = Experiment::new(&load(&common)?)?;
            publish(&run_pipeline_on(&ex)?, &common)
        }
        Command::Baseline { common, kind } => {
            let ex = Experiment::new(&load(&common)?)?;
            let report = match kind {
                BaselineKind::Mean => baseline_mean_based_on(&ex)?,
                BaselineKind::PerPoint => baseline_per_point_on(&ex)?,
            };
            publish(&report, &common)
        }
        Command::Report { inputs, out } => {
            let mut reports = Vec::with_capacity(inputs.len());
            for p in &inputs {
                let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                reports.push(RunReport::from_json(&text).map_err(|e| format!("{}: {e}", p.display()))?);
            }
            let mut sink = sink(out.as_deref())?;
            write_csv(&reports, &mut sink)?;
            sink.flush()?;
            Ok(reports.iter().any(|r| r.degraded))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
