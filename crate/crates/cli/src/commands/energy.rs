use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use lfree::energy::{load_batches, sequence_energy_loss};
use serde_json::json;

use crate::output::{fmt_f, Report};

#[derive(Debug, Clone, Args)]
pub struct EnergyArgs {
    /// JSON batch file: one `{"model_samples", "target_samples"}` object or an array of them.
    #[arg(long)]
    pub batch: PathBuf,
    /// Distance exponent in (0, 2].
    #[arg(long, default_value_t = 1.0, value_parser = parse_energy_alpha)]
    pub alpha: f64,
}

fn parse_energy_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a <= 2.0 {
        Ok(a)
    } else {
        Err(format!("{a} is outside (0, 2]"))
    }
}

pub fn run(args: &EnergyArgs) -> anyhow::Result<Report> {
    let batches = load_batches(&args.batch).with_context(|| format!("loading batch file {}", args.batch.display()))?;
    let loss = sequence_energy_loss(&batches, args.alpha)?;
    Ok(Report::new(json!({
        "command": "energy",
        "alpha": args.alpha,
        "batches": batches.len(),
        "loss": loss,
    }))
    .summary("alpha", args.alpha)
    .summary("batches", batches.len())
    .summary("loss", fmt_f(loss)))
}
