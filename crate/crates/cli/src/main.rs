//! `lfree`: exact and batch temperature sampling, Brier-n / BrierLM
//! evaluation, cost simulation and energy loss from the command line.
//!
//! Exit status: 0 success, 1 other failure (unreadable or invalid input
//! files), 2 usage error, 3 call-budget exhaustion, 4 sampler protocol
//! violation.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use lfree::brier::BrierError;
use lfree::extproto::ProtoError;
use lfree::temp_batch::BatchError;
use lfree::temp_exact::ExactError;
use lfree::{RandomSeed, SampleError};

use commands::brier::EvalBrierArgs;
use commands::cost::CostSimArgs;
use commands::energy::EnergyArgs;
use commands::oracle::OracleArgs;
use commands::sample::SampleArgs;
use output::OutputFormat;

#[derive(Debug, Parser)]
#[command(name = "lfree", version, about = "Likelihood-free temperature sampling and scoring for implicit models")]
struct Cli {
    /// Master seed; every random stream in a run derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t)]
    output_format: OutputFormat,
    /// Write the report to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw temperature samples with the exact or the batch algorithm.
    Sample(SampleArgs),
    /// Brier-n and BrierLM of a sampler against a corpus.
    EvalBrier(EvalBrierArgs),
    /// Empirical versus closed-form sampler-call cost over a grid of temperatures.
    CostSim(CostSimArgs),
    /// Energy loss of model samples against target samples.
    Energy(EnergyArgs),
    /// Exact target distribution, expected calls and cost bound.
    Oracle(OracleArgs),
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct BudgetExhausted(pub String);

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_PROTOCOL: u8 = 4;

fn sample_error_code(e: &SampleError) -> u8 {
    match e {
        SampleError::Protocol(_) | SampleError::EmptyOutcome | SampleError::WrongCount { .. } => EXIT_PROTOCOL,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<BudgetExhausted>() {
            return EXIT_BUDGET;
        }
        if cause.is::<ProtoError>() {
            return EXIT_PROTOCOL;
        }
        if let Some(e) = cause.downcast_ref::<SampleError>() {
            return sample_error_code(e);
        }
        match cause.downcast_ref::<ExactError>() {
            Some(ExactError::Sampler(e)) => return sample_error_code(e),
            Some(_) => return EXIT_BUDGET,
            None => {}
        }
        if let Some(BrierError::Sampler(e)) = cause.downcast_ref::<BrierError>() {
            return sample_error_code(e);
        }
        if let Some(BatchError::Sampler(e)) = cause.downcast_ref::<BatchError>() {
            return sample_error_code(e);
        }
    }
    EXIT_FAILURE
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let seed = RandomSeed(cli.seed);
    let report = match &cli.command {
        Command::Sample(a) => commands::sample::run(a, seed)?,
        Command::EvalBrier(a) => commands::brier::run(a, seed)?,
        Command::CostSim(a) => commands::cost::run(a, seed)?,
        Command::Energy(a) => commands::energy::run(a)?,
        Command::Oracle(a) => commands::oracle::run(a)?,
    };
    output::emit(&report.render(cli.output_format)?, cli.output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            if code == EXIT_USAGE {
                let mut cmd = Cli::command();
                let usage = cmd.render_usage();
                eprintln!("error: {err:#}\n\n{usage}");
            } else {
                eprintln!("lfree: {err:#}");
            }
            ExitCode::from(code)
        }
    }
}
