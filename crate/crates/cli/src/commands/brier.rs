use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use lfree::brier::{evaluate_documents, geometric_composite, BrierReport, EvalConfig, DEFAULT_MAX_ORDER};
use lfree::corpus::{load_corpus, CorpusFormat};
use lfree::RandomSeed;
use serde_json::json;

use super::{close_source, open_source};
use crate::output::{fmt_f, Report};
use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum FormatArg {
    #[default]
    Auto,
    Jsonl,
    Bytes,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Auto => CorpusFormat::Auto,
            FormatArg::Jsonl => CorpusFormat::Jsonl,
            FormatArg::Bytes => CorpusFormat::Bytes,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvalBrierArgs {
    /// Corpus file: raw bytes, or JSON lines of token-id arrays.
    #[arg(long, required_unless_present = "combine_only")]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub corpus_format: FormatArg,
    /// Context-free explicit pmf over chunks.
    #[arg(long, conflicts_with = "external")]
    pub pmf: Option<PathBuf>,
    /// Command line of an external sampler speaking the NDJSON protocol.
    #[arg(long)]
    pub external: Option<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_order: u64,
    /// Keep only the last N tokens of context.
    #[arg(long)]
    pub context_window: Option<usize>,
    /// Skip evaluation and combine given Brier-n values (fractions, comma-separated).
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with_all = ["corpus", "pmf", "external"])]
    pub combine_only: Option<Vec<f64>>,
}

pub fn run(args: &EvalBrierArgs, seed: RandomSeed) -> anyhow::Result<Report> {
    if let Some(values) = &args.combine_only {
        return combine(values);
    }
    let Some(corpus_path) = &args.corpus else {
        unreachable!("clap requires --corpus")
    };
    if args.pmf.is_none() && args.external.is_none() {
        return Err(UsageError("eval-brier needs --pmf or --external".into()).into());
    }
    let documents = load_corpus(corpus_path, args.corpus_format.into())
        .with_context(|| format!("loading corpus {}", corpus_path.display()))?;
    let config = EvalConfig {
        max_order: args.max_order as usize,
        stride: args.stride as usize,
        context_window: args.context_window,
    };
    let (mut source, _) = open_source(args.pmf.as_deref(), args.external.as_deref())?;
    let report = evaluate_documents(&mut source, &documents, &config, seed);
    close_source(source);
    let report = report?;
    Ok(render(&report, seed, args, documents.len()))
}

fn render(r: &BrierReport, seed: RandomSeed, args: &EvalBrierArgs, documents: usize) -> Report {
    let json = json!({
        "command": "eval-brier",
        "seed": seed.0,
        "max_order": args.max_order,
        "stride": args.stride,
        "documents": documents,
        "positions": r.positions,
        "brier_lm": r.brier_lm,
        "brier_n": r.brier_n,
        "accuracy": r.accuracy,
        "collision": r.collision,
        "counts": r.counts,
    });
    let mut report = Report::new(json)
        .header(["order", "brier", "accuracy", "collision", "positions"])
        .summary("brier_lm", fmt_f(r.brier_lm))
        .summary("positions", r.positions);
    for (n, b) in &r.brier_n {
        report.row(vec![
            n.to_string(),
            fmt_f(*b),
            fmt_f(r.accuracy[n]),
            fmt_f(r.collision[n]),
            r.counts[n].positions.to_string(),
        ]);
    }
    report
}

fn combine(values: &[f64]) -> anyhow::Result<Report> {
    if values.iter().any(|v| !v.is_finite() || *v > 1.0) {
        return Err(UsageError("--combine-only takes Brier-n values as fractions in [-1, 1], e.g. 0.2181".into()).into());
    }
    let brier_n: BTreeMap<usize, f64> = values.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect();
    let brier_lm = geometric_composite(values.iter().copied());
    let mut report = Report::new(json!({
        "command": "eval-brier",
        "brier_n": brier_n,
        "brier_lm": brier_lm,
    }));
    for (n, b) in &brier_n {
        report = report.summary(&format!("brier_{n}"), b);
    }
    Ok(report.summary("brier_lm", brier_lm))
}
