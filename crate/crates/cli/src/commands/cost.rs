use std::path::PathBuf;

use clap::Args;
use lfree::temp_exact::{run_cost_experiment, ExactError};
use lfree::{InverseTemperature, RandomSeed};
use serde_json::json;

use super::load_pmf;
use crate::output::{fmt_f, Report};
use crate::BudgetExhausted;

#[derive(Debug, Clone, Args)]
pub struct CostSimArgs {
    #[arg(long)]
    pub pmf: PathBuf,
    /// Comma-separated inverse temperatures, e.g. `2/1,5/2,3/1`.
    #[arg(long, value_name = "P/Q,...", value_delimiter = ',', required = true)]
    pub inv_temp_grid: Vec<InverseTemperature>,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Hard cap on sampler calls per trial (unbounded by default).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: Option<u64>,
}

pub fn run(args: &CostSimArgs, seed: RandomSeed) -> anyhow::Result<Report> {
    let dist = load_pmf(&args.pmf)?;
    let rows = args
        .inv_temp_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            run_cost_experiment(&dist, t, args.trials, seed.derive(k as u64), args.budget).map_err(|e| match e {
                ExactError::BudgetExhausted { .. } | ExactError::BudgetBelowAttempt { .. } => {
                    anyhow::Error::new(BudgetExhausted(format!("1/T = {t}: {e}")))
                }
                other => other.into(),
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let json_rows: Vec<_> = rows
        .iter()
        .map(|r| {
            json!({
                "inv_temp": r.inv_temp,
                "temperature": r.inv_temp.temperature(),
                "regime": r.regime,
                "theoretical_expected_calls": r.theoretical_expected_calls,
                "empirical_mean_calls": r.empirical_mean_calls,
                "relative_error": r.relative_error(),
                "bound": r.bound,
                "trials": r.trials,
            })
        })
        .collect();
    let mut report = Report::new(json!({
        "command": "cost-sim",
        "seed": seed.0,
        "trials": args.trials,
        "rows": json_rows,
    }))
    .header(["inv_temp", "regime", "theoretical", "empirical", "rel_error", "bound"]);
    for r in &rows {
        report.row(vec![
            r.inv_temp.to_string(),
            r.regime.to_string(),
            fmt_f(r.theoretical_expected_calls),
            fmt_f(r.empirical_mean_calls),
            fmt_f(r.relative_error()),
            fmt_f(r.bound),
        ]);
    }
    Ok(report)
}

