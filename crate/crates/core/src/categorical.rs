//! Explicit categorical distributions over [`Outcome`]s.
//!
//! These are the ground truth for every statistical check in the crate: the
//! samplers under test only ever see draws, while the oracles read the pmf.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::outcome::Outcome;
use crate::rng::{LfRng, RandomSeed};

/// Allowed deviation of the probability mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum DistError {
    #[error("distribution has no outcomes")]
    Empty,
    #[error("no samples")]
    NoSamples,
    #[error("probability {0} is not a finite non-negative number")]
    InvalidProbability(f64),
    #[error("duplicate outcome {0:?}")]
    DuplicateOutcome(Outcome),
    #[error("empty outcome at index {0}")]
    EmptyOutcome(usize),
    #[error("probabilities sum to {0}, expected 1")]
    BadMass(f64),
    #[error("{outcomes} outcomes but {probs} probabilities")]
    LengthMismatch { outcomes: usize, probs: usize },
    #[error("pmf file: {0}")]
    Io(#[from] std::io::Error),
    #[error("pmf file: {0}")]
    Json(#[from] serde_json::Error),
}

/// A finite pmf over outcomes. Zero-probability entries are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitCategorical {
    entries: BTreeMap<Outcome, f64>,
}

impl ExplicitCategorical {
    /// Validates and builds a pmf. Duplicates, negative or non-finite
    /// probabilities, and a total mass off by more than [`MASS_TOLERANCE`]
    /// are rejected.
    pub fn new<I>(entries: I) -> Result<Self, DistError>
    where
        I: IntoIterator<Item = (Outcome, f64)>,
    {
        let mut map = BTreeMap::new();
        let mut total = 0.0;
        for (outcome, p) in entries {
            if !p.is_finite() || p < 0.0 {
                return Err(DistError::InvalidProbability(p));
            }
            if map.contains_key(&outcome) {
                return Err(DistError::DuplicateOutcome(outcome));
            }
            total += p;
            map.insert(outcome, p);
        }
        if map.is_empty() {
            return Err(DistError::Empty);
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(DistError::BadMass(total));
        }
        map.retain(|_, p| *p > 0.0);
        Ok(ExplicitCategorical { entries: map })
    }

    /// Normalizes non-negative weights into a pmf.
    pub fn from_weights<I>(weights: I) -> Result<Self, DistError>
    where
        I: IntoIterator<Item = (Outcome, f64)>,
    {
        let raw: Vec<(Outcome, f64)> = weights.into_iter().collect();
        let mut total = 0.0;
        for (_, w) in &raw {
            if !w.is_finite() || *w < 0.0 {
                return Err(DistError::InvalidProbability(*w));
            }
            total += w;
        }
        if raw.is_empty() {
            return Err(DistError::Empty);
        }
        if total <= 0.0 {
            return Err(DistError::BadMass(total));
        }
        Self::new(raw.into_iter().map(|(o, w)| (o, w / total)))
    }

    /// Point mass on a single outcome.
    pub fn point(outcome: Outcome) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(outcome, 1.0);
        ExplicitCategorical { entries }
    }

    pub fn prob(&self, outcome: &Outcome) -> f64 {
        self.entries.get(outcome).copied().unwrap_or(0.0)
    }

    /// Number of outcomes with positive probability.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// Entries in canonical (sorted) outcome order.
    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, f64)> + '_ {
        self.entries.iter().map(|(o, p)| (o, *p))
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &Outcome> + '_ {
        self.entries.keys()
    }

    /// Σ p(x)^exponent over the support.
    pub fn power_sum(&self, exponent: f64) -> f64 {
        self.entries.values().map(|p| p.powf(exponent)).sum()
    }

    pub fn to_file_format(&self) -> PmfFile {
        PmfFile {
            outcomes: self.entries.keys().map(|o| o.tokens().to_vec()).collect(),
            probs: self.entries.values().copied().collect(),
        }
    }

    pub fn from_file_format(file: PmfFile) -> Result<Self, DistError> {
        if file.outcomes.len() != file.probs.len() {
            return Err(DistError::LengthMismatch {
                outcomes: file.outcomes.len(),
                probs: file.probs.len(),
            });
        }
        let mut entries = Vec::with_capacity(file.outcomes.len());
        for (i, (tokens, p)) in file.outcomes.into_iter().zip(file.probs).enumerate() {
            let outcome = Outcome::try_new(tokens).ok_or(DistError::EmptyOutcome(i))?;
            entries.push((outcome, p));
        }
        Self::new(entries)
    }

    pub fn from_json_str(s: &str) -> Result<Self, DistError> {
        Self::from_file_format(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DistError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_file_format()).expect("pmf serializes")
    }
}

/// On-disk pmf layout: parallel `outcomes` / `probs` arrays.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PmfFile {
    pub outcomes: Vec<Vec<u32>>,
    pub probs: Vec<f64>,
}

/// Inverse-CDF sampler over a fixed pmf. Cheap to share between threads.
#[derive(Debug, Clone)]
pub struct CategoricalTable {
    outcomes: Vec<Outcome>,
    cumulative: Vec<f64>,
}

impl CategoricalTable {
    pub fn new(dist: &ExplicitCategorical) -> Self {
        let mut outcomes = Vec::with_capacity(dist.support_size());
        let mut cumulative = Vec::with_capacity(dist.support_size());
        let mut acc = 0.0;
        for (o, p) in dist.iter() {
            acc += p;
            outcomes.push(o.clone());
            cumulative.push(acc);
        }
        CategoricalTable {
            outcomes,
            cumulative,
        }
    }

    /// Draws an index into [`CategoricalTable::outcomes`]. Consumes one `f64`.
    #[inline]
    pub fn draw_index(&self, rng: &mut LfRng) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let u: f64 = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.outcomes.len() - 1)
    }

    pub fn draw(&self, rng: &mut LfRng) -> &Outcome {
        &self.outcomes[self.draw_index(rng)]
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }
}

/// Draws `count` i.i.d. outcomes from `dist`.
pub fn sample_categorical(dist: &ExplicitCategorical, count: usize, seed: RandomSeed) -> Vec<Outcome> {
    let table = CategoricalTable::new(dist);
    let mut rng = seed.rng();
    (0..count).map(|_| table.draw(&mut rng).clone()).collect()
}

/// Total variation distance ½ Σ |p(x) − q(x)| over the union of supports.
pub fn tv_distance(p: &ExplicitCategorical, q: &ExplicitCategorical) -> f64 {
    let mut sum = 0.0;
    for (o, pp) in p.iter() {
        sum += (pp - q.prob(o)).abs();
    }
    for (o, qq) in q.iter() {
        if p.prob(o) == 0.0 {
            sum += qq;
        }
    }
    (0.5 * sum).clamp(0.0, 1.0)
}

/// Relative frequencies of `samples`.
pub fn empirical_pmf<'a, I>(samples: I) -> Result<ExplicitCategorical, DistError>
where
    I: IntoIterator<Item = &'a Outcome>,
{
    let mut counts: BTreeMap<Outcome, u64> = BTreeMap::new();
    for s in samples {
        *counts.entry(s.clone()).or_default() += 1;
    }
    pmf_from_counts(&counts)
}

/// Normalizes a count map into a pmf.
pub fn pmf_from_counts(counts: &BTreeMap<Outcome, u64>) -> Result<ExplicitCategorical, DistError> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(DistError::NoSamples);
    }
    let entries = counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(o, &c)| (o.clone(), c as f64 / total as f64))
        .collect();
    Ok(ExplicitCategorical { entries })
}
