//! Approximate low-temperature sampling by combinatorial search in a batch.
//!
//! For `T = 1/n`, draw `N` outcomes, count them, and give every outcome that
//! occurs at least `m` times the weight `C(count, m)`, starting at `m = n` and
//! lowering `m` until some outcome qualifies. The output is a weighted draw
//! over the qualifying outcomes. Biased for finite `N`; the bias vanishes as
//! `N → ∞`.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::categorical::{pmf_from_counts, tv_distance, ExplicitCategorical};
use crate::outcome::{Outcome, TokenId};
use crate::rng::{LfRng, RandomSeed};
use crate::sampler::{ExplicitSampler, SampleError, Sampler};
use crate::temp_exact::{target_distribution, InverseTemperature};

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error("target n must be at least 1")]
    ZeroN,
    #[error(transparent)]
    Sampler(#[from] SampleError),
}

/// `C(count, m)` in floating point via the multiplicative form.
pub fn binomial_weight(count: u64, m: u64) -> f64 {
    if m > count {
        return 0.0;
    }
    let mut w = 1.0;
    for i in 0..m {
        w *= (count - i) as f64 / (i + 1) as f64;
    }
    w
}

/// Everything needed to audit one batch draw.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSampleTrace {
    pub batch_size: u64,
    pub target_n: u64,
    pub counts: BTreeMap<Outcome, u64>,
    /// The matching requirement after fallback.
    pub used_m: u64,
    pub candidate_weights: BTreeMap<Outcome, f64>,
    pub chosen: Outcome,
}

impl BatchSampleTrace {
    /// Selection probabilities implied by the candidate weights.
    pub fn choice_probabilities(&self) -> BTreeMap<Outcome, f64> {
        let total: f64 = self.candidate_weights.values().sum();
        self.candidate_weights
            .iter()
            .map(|(o, w)| (o.clone(), w / total))
            .collect()
    }

    /// Repeats the weighted choice on this frozen batch.
    pub fn resample_choice(&self, rng: &mut LfRng) -> Outcome {
        weighted_choice(&self.candidate_weights, rng).clone()
    }
}

/// Candidate set and weights for the largest `m ≤ n` with a non-empty set.
pub fn candidates(counts: &BTreeMap<Outcome, u64>, n: u64) -> (u64, BTreeMap<Outcome, f64>) {
    for m in (1..=n).rev() {
        let cands: BTreeMap<Outcome, f64> = counts
            .iter()
            .filter(|(_, &c)| c >= m)
            .map(|(o, &c)| (o.clone(), binomial_weight(c, m)))
            .collect();
        if !cands.is_empty() {
            return (m, cands);
        }
    }
    unreachable!("a non-empty batch has an outcome with count >= 1")
}

/// One uniform variate against the cumulative weights, in sorted outcome order.
fn weighted_choice<'a>(weights: &'a BTreeMap<Outcome, f64>, rng: &mut LfRng) -> &'a Outcome {
    let total: f64 = weights.values().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (o, w) in weights {
        acc += w;
        last = Some(o);
        if u < acc {
            return o;
        }
    }
    last.expect("non-empty candidate set")
}

/// Choice step of the algorithm on an already-counted batch.
pub fn choose_from_counts(counts: BTreeMap<Outcome, u64>, n: u64, rng: &mut LfRng) -> BatchSampleTrace {
    let batch_size = counts.values().sum();
    let (used_m, candidate_weights) = candidates(&counts, n);
    let chosen = weighted_choice(&candidate_weights, rng).clone();
    BatchSampleTrace {
        batch_size,
        target_n: n,
        counts,
        used_m,
        candidate_weights,
        chosen,
    }
}

/// Draws a batch of `batch_size` from `source` and picks one outcome. The
/// batch is requested in a single sampler call.
pub fn batch_temperature_sample_with_rng<S: Sampler + ?Sized>(
    source: &mut S,
    context: &[TokenId],
    n: u64,
    batch_size: u64,
    rng: &mut LfRng,
) -> Result<BatchSampleTrace, BatchError> {
    if n == 0 {
        return Err(BatchError::ZeroN);
    }
    if batch_size == 0 {
        return Err(BatchError::EmptyBatch);
    }
    let counts = source.draw_counts(context, batch_size as usize, rng)?;
    let drawn: u64 = counts.values().sum();
    if drawn != batch_size {
        return Err(SampleError::WrongCount {
            expected: batch_size as usize,
            got: drawn as usize,
        }
        .into());
    }
    Ok(choose_from_counts(counts, n, rng))
}

pub fn batch_temperature_sample<S: Sampler + ?Sized>(
    source: &mut S,
    n: u64,
    batch_size: u64,
    seed: RandomSeed,
) -> Result<BatchSampleTrace, BatchError> {
    batch_temperature_sample_with_rng(source, &[], n, batch_size, &mut seed.rng())
}

/// Empirical output distribution of the batch algorithm from `runs`
/// independent batches; run `i` uses `seed.derive(i)`.
pub fn batch_output_distribution(
    dist: &ExplicitCategorical,
    n: u64,
    batch_size: u64,
    runs: u64,
    seed: RandomSeed,
) -> Result<ExplicitCategorical, BatchError> {
    let sampler = ExplicitSampler::new(dist);
    let tally = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut src = &sampler;
            batch_temperature_sample_with_rng(&mut src, &[], n, batch_size, &mut seed.derive(i).rng()).map(|t| t.chosen)
        })
        .try_fold(BTreeMap::new, |mut acc: BTreeMap<Outcome, u64>, chosen| {
            *acc.entry(chosen?).or_default() += 1;
            Ok::<_, BatchError>(acc)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (o, c) in b {
                *a.entry(o).or_default() += c;
            }
            Ok(a)
        })?;
    Ok(pmf_from_counts(&tally).expect("runs >= 1"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub batch_size: u64,
    pub tv_to_target: f64,
}

/// TV distance between the batch algorithm's output and `P^n/Z` for each
/// batch size. Batch size `k` in the list uses `seed.derive(k)`.
pub fn convergence_study(
    dist: &ExplicitCategorical,
    n: u64,
    batch_sizes: &[u64],
    runs_per_size: u64,
    seed: RandomSeed,
) -> Result<Vec<ConvergencePoint>, BatchError> {
    if n == 0 {
        return Err(BatchError::ZeroN);
    }
    let target = if n == 1 {
        dist.clone()
    } else {
        target_distribution(dist, InverseTemperature::integer(n).expect("n >= 2"))
    };
    batch_sizes
        .iter()
        .enumerate()
        .map(|(k, &size)| {
            let emp = batch_output_distribution(dist, n, size, runs_per_size, seed.derive(k as u64))?;
            Ok(ConvergencePoint {
                batch_size: size,
                tv_to_target: tv_distance(&emp, &target),
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct CountEntry {
    outcome: Outcome,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct WeightEntry {
    outcome: Outcome,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct TraceRepr {
    batch_size: u64,
    target_n: u64,
    counts: Vec<CountEntry>,
    used_m: u64,
    weights: Vec<WeightEntry>,
    chosen: Outcome,
}

impl Serialize for BatchSampleTrace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TraceRepr {
            batch_size: self.batch_size,
            target_n: self.target_n,
            counts: self
                .counts
                .iter()
                .map(|(o, &count)| CountEntry {
                    outcome: o.clone(),
                    count,
                })
                .collect(),
            used_m: self.used_m,
            weights: self
                .candidate_weights
                .iter()
                .map(|(o, &weight)| WeightEntry {
                    outcome: o.clone(),
                    weight,
                })
                .collect(),
            chosen: self.chosen.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BatchSampleTrace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = TraceRepr::deserialize(deserializer)?;
        Ok(BatchSampleTrace {
            batch_size: r.batch_size,
            target_n: r.target_n,
            counts: r.counts.into_iter().map(|e| (e.outcome, e.count)).collect(),
            used_m: r.used_m,
            candidate_weights: r.weights.into_iter().map(|e| (e.outcome, e.weight)).collect(),
            chosen: r.chosen,
        })
    }
}
