use clap::Args;
use lfree::temp_batch::batch_temperature_sample_with_rng;
use lfree::temp_exact::{
    exact_sample_many, exact_temperature_sample_with_rng, expected_calls, ExactError, ExactSample, DEFAULT_CALL_BUDGET,
};
use lfree::{InverseTemperature, RandomSeed, SamplerSource, TokenId};
use serde_json::json;

use super::{close_source, open_source, outcome_cell, SourceArgs};
use crate::output::{fmt_f, Report};
use crate::{BudgetExhausted, UsageError};

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Exact algorithm at inverse temperature p/q (> 1).
    #[arg(long, value_name = "P/Q", required_unless_present = "n", conflicts_with_all = ["n", "batch_size"])]
    pub inv_temp: Option<InverseTemperature>,
    /// Batch algorithm target power (1/T = n).
    #[arg(long, requires = "batch_size", value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    /// Batch algorithm batch size.
    #[arg(long, requires = "n", value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Sampler-call budget per exact sample.
    #[arg(long, default_value_t = DEFAULT_CALL_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Comma-separated context tokens passed to an external sampler.
    #[arg(long, value_delimiter = ',')]
    pub context: Vec<TokenId>,
}

pub fn run(args: &SampleArgs, seed: RandomSeed) -> anyhow::Result<Report> {
    if !args.context.is_empty() && args.source.external.is_none() {
        return Err(UsageError("--context needs --external; an explicit pmf is context-free".into()).into());
    }
    let (mut source, dist) = open_source(args.source.pmf.as_deref(), args.source.external.as_deref())?;
    let report = match (args.inv_temp, args.n, args.batch_size) {
        (Some(t), _, _) => run_exact(args, t, &mut source, dist.as_ref(), seed),
        (None, Some(n), Some(b)) => run_batch(args, n, b, &mut source, seed),
        _ => unreachable!("clap enforces one algorithm"),
    };
    close_source(source);
    report
}

fn run_exact(
    args: &SampleArgs,
    inv_temp: InverseTemperature,
    source: &mut SamplerSource,
    dist: Option<&lfree::ExplicitCategorical>,
    seed: RandomSeed,
) -> anyhow::Result<Report> {
    let expected = dist.map(|d| expected_calls(d, inv_temp));
    let samples: Result<Vec<ExactSample>, ExactError> = match dist {
        Some(d) => exact_sample_many(d, inv_temp, args.count, seed, args.budget),
        None => (0..args.count as u64)
            .map(|i| {
                exact_temperature_sample_with_rng(source, &args.context, inv_temp, &mut seed.derive(i).rng(), args.budget)
            })
            .collect(),
    };
    let samples = samples.map_err(|e| match e {
        ExactError::BudgetExhausted { calls_used } => {
            let mut msg = format!("call budget {} exhausted after {calls_used} sampler calls", args.budget);
            if let Some(x) = expected {
                msg += &format!("; expected_calls per sample at 1/T = {inv_temp} is {x}");
            }
            anyhow::Error::new(BudgetExhausted(msg))
        }
        ExactError::BudgetBelowAttempt { .. } => anyhow::Error::new(BudgetExhausted(e.to_string())),
        other => other.into(),
    })?;

    let total: u64 = samples.iter().map(|s| s.calls_used).sum();
    let json = json!({
        "command": "sample",
        "algorithm": "exact",
        "seed": seed.0,
        "inv_temp": inv_temp,
        "count": args.count,
        "budget": args.budget,
        "expected_calls": expected,
        "total_calls": total,
        "samples": samples,
    });
    let mut report = Report::new(json)
        .header(["index", "outcome", "calls_used"])
        .summary("algorithm", "exact")
        .summary("inv_temp", inv_temp)
        .summary("total_calls", total);
    if let Some(x) = expected {
        report = report.summary("expected_calls", fmt_f(x));
    }
    for (i, s) in samples.iter().enumerate() {
        report.row(vec![i.to_string(), outcome_cell(&s.outcome), s.calls_used.to_string()]);
    }
    Ok(report)
}

fn run_batch(
    args: &SampleArgs,
    n: u64,
    batch_size: u64,
    source: &mut SamplerSource,
    seed: RandomSeed,
) -> anyhow::Result<Report> {
    let traces = (0..args.count as u64)
        .map(|i| batch_temperature_sample_with_rng(source, &args.context, n, batch_size, &mut seed.derive(i).rng()))
        .collect::<Result<Vec<_>, _>>()?;
    let samples: Vec<_> = traces
        .iter()
        .map(|t| json!({"outcome": t.chosen, "trace": t}))
        .collect();
    let json = json!({
        "command": "sample",
        "algorithm": "batch",
        "seed": seed.0,
        "n": n,
        "batch_size": batch_size,
        "count": args.count,
        "samples": samples,
    });
    let mut report = Report::new(json)
        .header(["index", "outcome", "used_m", "candidates", "choice_probability"])
        .summary("algorithm", "batch")
        .summary("n", n)
        .summary("batch_size", batch_size);
    for (i, t) in traces.iter().enumerate() {
        let p = t.choice_probabilities().get(&t.chosen).copied().unwrap_or(0.0);
        report.row(vec![
            i.to_string(),
            outcome_cell(&t.chosen),
            t.used_m.to_string(),
            t.candidate_weights.len().to_string(),
            fmt_f(p),
        ]);
    }
    Ok(report)
}
