pub mod brier;
pub mod cost;
pub mod energy;
pub mod oracle;
pub mod sample;

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use lfree::extproto::{ExternalSampler, SpawnConfig};
use lfree::{ExplicitCategorical, Outcome, SamplerSource};
use serde_json::{json, Value};

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Explicit pmf file (`{"outcomes": [[..]], "probs": [..]}`).
    #[arg(long)]
    pub pmf: Option<PathBuf>,
    /// Command line of an external sampler speaking the NDJSON protocol.
    #[arg(long)]
    pub external: Option<String>,
}

pub fn load_pmf(path: &Path) -> anyhow::Result<ExplicitCategorical> {
    ExplicitCategorical::load(path).with_context(|| format!("loading pmf {}", path.display()))
}

/// The sampler, plus the pmf itself when it is explicit.
pub fn open_source(
    pmf: Option<&Path>,
    external: Option<&str>,
) -> anyhow::Result<(SamplerSource, Option<ExplicitCategorical>)> {
    match (pmf, external) {
        (Some(path), _) => {
            let dist = load_pmf(path)?;
            Ok((SamplerSource::explicit(&dist), Some(dist)))
        }
        (None, Some(cmd)) => {
            let child = ExternalSampler::spawn_command_line(cmd, SpawnConfig::default())?;
            Ok((SamplerSource::External(child), None))
        }
        (None, None) => anyhow::bail!("no sampler source given"),
    }
}

pub fn close_source(source: SamplerSource) {
    if let SamplerSource::External(child) = source {
        child.close();
    }
}

pub fn pmf_json(dist: &ExplicitCategorical) -> Value {
    json!(dist.to_file_format())
}

pub fn outcome_cell(o: &Outcome) -> String {
    o.to_string()
}
