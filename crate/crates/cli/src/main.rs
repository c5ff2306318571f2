//! `pas` command-line tool: fit, predict, generate, benchmark and diagnose.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "pas",
    version,
    about = "Progressive adaptation of class subspaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on labeled source and unlabeled target features.
    Fit(FitArgs),
    /// Predict labels for a feature file with a saved model.
    Predict(PredictArgs),
    /// Generate a seeded synthetic source/target pair.
    Synth(SynthArgs),
    /// Compare 1NN, PAS(c) and PAS on a synthetic suite over several seeds.
    Bench(BenchArgs),
    /// Density-ratio report for the most and least reliable target samples.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long)]
    pub out_model: PathBuf,
    #[arg(long)]
    pub trace_csv: PathBuf,
    /// True target labels, used only for the per-stage pseudo-label accuracy column.
    #[arg(long)]
    pub eval_labels: Option<PathBuf>,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    #[arg(long, default_value_t = 0.0)]
    pub rotation: f64,
    #[arg(long, default_value_t = 0.0)]
    pub translation: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Comma-separated class indices kept in the target.
    #[arg(long, value_delimiter = ',')]
    pub pda_keep: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Norm of each class mean.
    #[arg(long, default_value_t = 3.0)]
    pub separation: f64,
    /// Standard deviation along each class direction.
    #[arg(long, default_value_t = 3.0)]
    pub spread: f64,
    /// Isotropic off-direction noise.
    #[arg(long, default_value_t = 0.5)]
    pub thickness: f64,
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "closed")]
    pub suite: String,
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[arg(long)]
    pub out_csv: PathBuf,
    #[arg(long)]
    pub rotation: Option<f64>,
    #[arg(long)]
    pub translation: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Source features; the density ratio is p_source / p_target.
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub true_labels: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub fraction: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write `method,seed,accuracy,adr` rows for the two groups.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub centers: usize,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Diagnose(a) => commands::diagnose(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pas: {e}");
            ExitCode::from(output::exit_code(&e) as u8)
        }
    }
}
