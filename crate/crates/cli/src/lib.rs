//! Command surface of the `reach` binary.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or format error,
//! 3 usage error.

pub mod commands;

use std::fmt;

use clap::{Parser, Subcommand};

pub use commands::bench::{run_bench, BenchConfig, BenchReport, BenchRow};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "reach", version, about = "Reachability summaries from GPS trajectories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build per-tile reachability summaries and write an RSUM file
    Summarize(commands::summarize::Args),
    /// Render a count, bucketed, road or embedding raster to an RTEN file
    Rasterize(commands::rasterize::Args),
    /// Split raw T-Drive files into per-day trajectories (generic CSV)
    PreprocessTdrive(commands::tdrive::Args),
    /// Write dense (N, L, L, 2) summaries for the embedding trainer
    ExportSummaries(commands::export::Args),
    /// Check the Chapman-Kolmogorov identity on a summary
    VerifyCke(commands::verify::Args),
    /// Strong-scaling benchmark of the summary builder
    Bench(commands::bench::Args),
    /// Write a deterministic synthetic trajectory CSV
    GenSynthetic(commands::synth::Args),
}

/// Flag combination that parsed but makes no sense together.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Runs a parsed command, returning the process exit code on success.
pub fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Summarize(a) => commands::summarize::run(a),
        Command::Rasterize(a) => commands::rasterize::run(a),
        Command::PreprocessTdrive(a) => commands::tdrive::run(a),
        Command::ExportSummaries(a) => commands::export::run(a),
        Command::VerifyCke(a) => commands::verify::run(a),
        Command::Bench(a) => commands::bench::run(a),
        Command::GenSynthetic(a) => commands::synth::run(a),
    }
}

/// Exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<reach_core::Error>() {
            return match e {
                reach_core::Error::InvalidParameter(_) => EXIT_USAGE,
                _ => EXIT_INPUT,
            };
        }
    }
    EXIT_INPUT
}
