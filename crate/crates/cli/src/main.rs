//! `spescreen`: command-line driver for the emitter screening pipeline.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
//! failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod artifacts;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Ctx;
use crate::config::PipelineConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "spescreen", version, about = "Screen molecular single-photon emitters in organic host crystals")]
struct Cli {
    /// TOML configuration with one section per stage
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every stochastic stage (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on this
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for outputs and manifests (default: current directory)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Log more (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank a SMILES table by fingerprint similarity to a reference
    Similarity(commands::similarity::SimilarityArgs),
    /// Two-dimensional t-SNE map of a SMILES table with density clusters
    Map(commands::map::MapArgs),
    /// Insert an emitter into a host supercell and rank the complexes
    Embed(commands::embed::EmbedArgs),
    /// Harmonic normal modes of a structure
    Modes(commands::modes::ModesArgs),
    /// Vibronic coupling entropy and Huang-Rhys factors
    Vibronic(commands::vibronic::VibronicArgs),
    /// Spin-orbit aggregates from excited-state tables
    Spin(commands::spin::SpinArgs),
    /// Linear and quadratic Stark coefficients
    Stark(commands::stark::StarkArgs),
    /// Good/bad labels for candidate records
    Label(commands::classify::LabelArgs),
    /// Labels, PCA scores and Gaussian-process probabilities
    Classify(commands::classify::ClassifyArgs),
    /// Summary table and plot-ready figure data for candidate records
    Report(commands::report::ReportArgs),
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(n) = cli.threads.or(cfg.threads) {
        if n == 0 {
            return Err(CliError::validation("cli", "--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::validation("cli", e))?;
    }
    let out_dir = cli.out_dir.clone().or_else(|| cfg.at(&cfg.out_dir)).unwrap_or_else(|| PathBuf::from("."));
    let ctx = Ctx { seed: cli.seed.or(cfg.seed).unwrap_or(0), out_dir, cfg };
    match &cli.command {
        Command::Similarity(a) => commands::similarity::run(&ctx, a),
        Command::Map(a) => commands::map::run(&ctx, a),
        Command::Embed(a) => commands::embed::run(&ctx, a),
        Command::Modes(a) => commands::modes::run(&ctx, a),
        Command::Vibronic(a) => commands::vibronic::run(&ctx, a),
        Command::Spin(a) => commands::spin::run(&ctx, a),
        Command::Stark(a) => commands::stark::run(&ctx, a),
        Command::Label(a) => commands::classify::run_label(&ctx, a),
        Command::Classify(a) => commands::classify::run_classify(&ctx, a),
        Command::Report(a) => commands::report::run(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
