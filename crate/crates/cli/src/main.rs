//! `patrec`: inspect datasets, train and run pipelines, cross-validate and
//! export ROC curves and decision contours as CSV.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "patrec", version, about = "Composable pattern-recognition pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print observation, feature and class counts.
    Info(DataArgs),
    /// Cross-validate a pipeline; writes scores.csv, roc.csv and summary.json.
    Kfolds {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Number of folds.
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(2..))]
        k: u32,
        /// Seed for the fold assignment.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Train on the full dataset and evaluate the final classifier over a
    /// 2-D grid; writes contour.csv and points.csv.
    Contour {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Grid points per axis.
        #[arg(long, default_value_t = 100)]
        grid_steps: usize,
        /// Fraction of each axis range added on both sides.
        #[arg(long, default_value_t = 0.1)]
        grid_margin: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Train a pipeline and save it as model.json.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Apply a saved model; writes scores.csv.
    Run {
        #[command(flatten)]
        data: DataArgs,
        /// Model written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row, or `iris` for the bundled data.
    #[arg(long)]
    dataset: String,
    /// Column holding class labels (CSV files only; `iris` uses `species`).
    #[arg(long)]
    target_column: Option<String>,
    /// Relabel one class (by name or integer label) as positive, the rest negative.
    #[arg(long)]
    positive_class: Option<String>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PipelineArgs {
    /// Pipeline expression, e.g. "zmuv + pca(2) + map".
    #[arg(long)]
    pipeline: Option<String>,
    /// File holding a pipeline expression or a JSON spec document.
    #[arg(long)]
    pipeline_file: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Disable data-parallel execution (outputs are identical either way).
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
