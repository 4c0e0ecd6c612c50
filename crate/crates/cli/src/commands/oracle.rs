use std::path::PathBuf;

use clap::Args;
use lfree::temp_exact::{cost_bound, expected_calls, partition_function, target_distribution};
use lfree::InverseTemperature;
use serde_json::json;

use super::{load_pmf, outcome_cell, pmf_json};
use crate::output::{fmt_f, Report};

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub pmf: PathBuf,
    #[arg(long, value_name = "P/Q")]
    pub inv_temp: InverseTemperature,
}

pub fn run(args: &OracleArgs) -> anyhow::Result<Report> {
    let dist = load_pmf(&args.pmf)?;
    let t = args.inv_temp;
    let target = target_distribution(&dist, t);
    let expected = expected_calls(&dist, t);
    let bound = cost_bound(&dist, t);
    let z = partition_function(&dist, t);
    let mut report = Report::new(json!({
        "command": "oracle",
        "inv_temp": t,
        "temperature": t.temperature(),
        "regime": t.regime(),
        "partition_function": z,
        "target": pmf_json(&target),
        "expected_calls": expected,
        "cost_bound": bound,
    }))
    .header(["outcome", "p", "target_p"])
    .summary("inv_temp", t)
    .summary("regime", t.regime())
    .summary("partition_function", fmt_f(z))
    .summary("expected_calls", fmt_f(expected))
    .summary("cost_bound", fmt_f(bound));
    for (o, p) in dist.iter() {
        report.row(vec![outcome_cell(o), p.to_string(), target.prob(o).to_string()]);
    }
    Ok(report)
}
