use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use termsim::cli::{run_with_jobs, Command, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    /// Build datasets and the statistics table from an ontology release.
    Build,
    /// Score benchmarks under every embedding and metric.
    Eval,
    /// Pairwise significance tests between embeddings or metrics.
    Compare,
    /// Category separation (overlap error) report.
    Category,
    /// Recompute dataset statistics from built dataset files.
    Stats,
    /// Embedding coverage and vocabulary overlap.
    Coverage,
}

#[derive(Debug, Parser)]
#[command(
    name = "termsim",
    version,
    about = "Ontology-derived term similarity benchmarks"
)]
struct Args {
    #[arg(value_enum)]
    command: Sub,
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let mut cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.out = std::path::absolute(out).unwrap_or_default();
    }
    let command = match args.command {
        Sub::Build => Command::Build,
        Sub::Eval => Command::Eval,
        Sub::Compare => Command::Compare,
        Sub::Category => Command::Category,
        Sub::Stats => Command::Stats,
        Sub::Coverage => Command::Coverage,
    };
    match run_with_jobs(command, &cfg, args.jobs) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
