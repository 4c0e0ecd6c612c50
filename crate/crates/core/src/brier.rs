//! Likelihood-free Brier evaluation.
//!
//! The Brier score of a predictive pmf `P` at observation `y` is
//! `2 P(y) − Σ_x P(x)²`. With two independent samples `x₁, x₂ ~ P`, the
//! statistic `𝟙{x₁=y} + 𝟙{x₂=y} − 𝟙{x₁=x₂}` is an unbiased estimate of it, so
//! a model only has to be sampled, never scored.
//!
//! Brier-n applies the same estimator to n-grams treated as atomic outcomes.
//! BrierLM is `100 · (Π_{n=1..4} Brier-n)^{1/4}`.
//!
//! Corpus evaluation is teacher-forced: at position `t` the sampler is
//! conditioned on the ground-truth prefix `corpus[..t]`, two continuations are
//! drawn, and the same pair is cut to every order `n`. Orders whose n-gram
//! would run past the end of the corpus are skipped at that position.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::categorical::ExplicitCategorical;
use crate::outcome::{Outcome, TokenId};
use crate::rng::{LfRng, RandomSeed};
use crate::sampler::{SampleError, Sampler};

pub const DEFAULT_MAX_ORDER: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum BrierError {
    #[error("ngram order mismatch: {0}, {1} and {2} tokens")]
    OrderMismatch(usize, usize, usize),
    #[error("corpus of length {len} is too short for max order {max_order}")]
    CorpusTooShort { len: usize, max_order: usize },
    #[error("missing Brier-{0} value")]
    MissingOrder(usize),
    #[error("max order and stride must be positive")]
    InvalidConfig,
    #[error(transparent)]
    Sampler(#[from] SampleError),
}

/// `𝟙{x₁=y} + 𝟙{x₂=y} − 𝟙{x₁=x₂}`. Always −1, 0 or 1 (two hits imply a collision).
pub fn brier_sample_estimate(x1: &Outcome, x2: &Outcome, y: &Outcome) -> Result<i8, BrierError> {
    if x1.len() != y.len() || x2.len() != y.len() {
        return Err(BrierError::OrderMismatch(x1.len(), x2.len(), y.len()));
    }
    Ok(i8::from(x1 == y) + i8::from(x2 == y) - i8::from(x1 == x2))
}

/// Closed-form Brier score `2 P(y) − Σ P(x)²`; `y` may lie outside the support.
pub fn exact_brier(dist: &ExplicitCategorical, y: &Outcome) -> f64 {
    2.0 * dist.prob(y) - dist.power_sum(2.0)
}

/// `E_{y~truth}[exact_brier(model, y)]`.
pub fn expected_brier(model: &ExplicitCategorical, truth: &ExplicitCategorical) -> f64 {
    let accuracy: f64 = truth.iter().map(|(y, q)| q * model.prob(y)).sum();
    2.0 * accuracy - model.power_sum(2.0)
}

/// Indicator sums for one n-gram order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderCounts {
    pub match1: u64,
    pub match2: u64,
    pub collision: u64,
    pub positions: u64,
}

impl OrderCounts {
    pub fn record(&mut self, x1: &[TokenId], x2: &[TokenId], y: &[TokenId]) {
        self.match1 += u64::from(x1 == y);
        self.match2 += u64::from(x2 == y);
        self.collision += u64::from(x1 == x2);
        self.positions += 1;
    }

    /// Σ of the per-position estimates, exact.
    pub fn estimate_sum(&self) -> i64 {
        self.match1 as i64 + self.match2 as i64 - self.collision as i64
    }

    pub fn accuracy(&self) -> f64 {
        (self.match1 + self.match2) as f64 / (2 * self.positions) as f64
    }

    pub fn collision_rate(&self) -> f64 {
        self.collision as f64 / self.positions as f64
    }

    /// `2·accuracy − collision`, equal to `estimate_sum / positions`.
    pub fn brier(&self) -> f64 {
        2.0 * self.accuracy() - self.collision_rate()
    }

    fn merge(&mut self, other: &OrderCounts) {
        self.match1 += other.match1;
        self.match2 += other.match2;
        self.collision += other.collision;
        self.positions += other.positions;
    }
}

/// Running indicator sums for orders `1..=max_order`. Accumulators merge by
/// addition, so positions can be evaluated in any order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrierAccumulator {
    orders: Vec<OrderCounts>,
}

impl BrierAccumulator {
    pub fn new(max_order: usize) -> Self {
        BrierAccumulator {
            orders: vec![OrderCounts::default(); max_order],
        }
    }

    pub fn max_order(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self, n: usize) -> &OrderCounts {
        &self.orders[n - 1]
    }

    /// Records both sampled continuations against the ground truth at every
    /// order the truth is long enough for.
    pub fn record_position(&mut self, x1: &[TokenId], x2: &[TokenId], truth: &[TokenId]) {
        for (i, counts) in self.orders.iter_mut().enumerate() {
            let n = i + 1;
            if truth.len() < n {
                break;
            }
            counts.record(&x1[..n], &x2[..n], &truth[..n]);
        }
    }

    pub fn merge(&mut self, other: &BrierAccumulator) {
        assert_eq!(self.orders.len(), other.orders.len(), "accumulators of different max order");
        for (a, b) in self.orders.iter_mut().zip(&other.orders) {
            a.merge(b);
        }
    }

    pub fn report(&self) -> BrierReport {
        let mut brier_n = BTreeMap::new();
        let mut accuracy = BTreeMap::new();
        let mut collision = BTreeMap::new();
        let mut counts = BTreeMap::new();
        for (i, c) in self.orders.iter().enumerate() {
            let n = i + 1;
            if c.positions == 0 {
                continue;
            }
            brier_n.insert(n, c.brier());
            accuracy.insert(n, c.accuracy());
            collision.insert(n, c.collision_rate());
            counts.insert(n, *c);
        }
        let brier_lm = if brier_n.len() == self.orders.len() && !brier_n.is_empty() {
            geometric_composite(brier_n.values().copied())
        } else {
            0.0
        };
        BrierReport {
            brier_n,
            brier_lm,
            accuracy,
            collision,
            positions: self.orders.first().map_or(0, |c| c.positions),
            counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrierReport {
    pub brier_n: BTreeMap<usize, f64>,
    pub brier_lm: f64,
    pub accuracy: BTreeMap<usize, f64>,
    pub collision: BTreeMap<usize, f64>,
    /// Evaluation positions (order 1).
    pub positions: u64,
    /// Raw indicator sums behind each order's figures.
    pub counts: BTreeMap<usize, OrderCounts>,
}

/// `100 · (Π v)^{1/k}`, or 0 when any value is non-positive.
pub fn geometric_composite<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut log_sum = 0.0;
    let mut k = 0usize;
    for v in values {
        if v <= 0.0 || v.is_nan() {
            return 0.0;
        }
        log_sum += v.ln();
        k += 1;
    }
    if k == 0 {
        return 0.0;
    }
    (100.0 * (log_sum / k as f64).exp()).min(100.0)
}

/// BrierLM from Brier-1 through Brier-4.
pub fn combine_brier_lm(brier_n_values: &BTreeMap<usize, f64>) -> Result<f64, BrierError> {
    let mut vals = [0.0; 4];
    for (n, slot) in (1..=4).zip(vals.iter_mut()) {
        *slot = *brier_n_values.get(&n).ok_or(BrierError::MissingOrder(n))?;
    }
    Ok(geometric_composite(vals))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub max_order: usize,
    pub stride: usize,
    /// Only the last `w` ground-truth tokens are sent as context when set.
    pub context_window: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            max_order: DEFAULT_MAX_ORDER,
            stride: 1,
            context_window: None,
        }
    }
}

/// Draws one continuation of at least `min_len` tokens, extending short
/// chunks by conditioning on what has been sampled so far.
fn extend_continuation<S: Sampler + ?Sized>(
    source: &mut S,
    context: &[TokenId],
    first: Outcome,
    min_len: usize,
    rng: &mut LfRng,
) -> Result<Vec<TokenId>, SampleError> {
    let mut tokens = first.into_tokens();
    if tokens.is_empty() {
        return Err(SampleError::EmptyOutcome);
    }
    if tokens.len() >= min_len {
        return Ok(tokens);
    }
    let mut ctx = context.to_vec();
    while tokens.len() < min_len {
        ctx.truncate(context.len());
        ctx.extend_from_slice(&tokens);
        let next = source.draw(&ctx, 1, rng)?;
        let chunk = next.into_iter().next().ok_or(SampleError::WrongCount { expected: 1, got: 0 })?;
        if chunk.is_empty() {
            return Err(SampleError::EmptyOutcome);
        }
        tokens.extend_from_slice(chunk.tokens());
    }
    Ok(tokens)
}

/// Evaluates one position: draws a pair of continuations for the prefix
/// `corpus[..t]` and records them into `acc`.
fn evaluate_position<S: Sampler + ?Sized>(
    source: &mut S,
    corpus: &[TokenId],
    t: usize,
    config: &EvalConfig,
    rng: &mut LfRng,
    acc: &mut BrierAccumulator,
) -> Result<(), BrierError> {
    let start = config.context_window.map_or(0, |w| t.saturating_sub(w));
    let context = &corpus[start..t];
    let need = config.max_order.min(corpus.len() - t);
    let pair = source.draw(context, 2, rng)?;
    if pair.len() != 2 {
        return Err(SampleError::WrongCount {
            expected: 2,
            got: pair.len(),
        }
        .into());
    }
    let mut pair = pair.into_iter();
    let x1 = extend_continuation(source, context, pair.next().unwrap(), need, rng)?;
    let x2 = extend_continuation(source, context, pair.next().unwrap(), need, rng)?;
    acc.record_position(&x1, &x2, &corpus[t..]);
    Ok(())
}

/// Accumulates indicator sums over one token sequence. Position `t` uses
/// `seed.derive(t)`.
pub fn accumulate_corpus<S: Sampler + ?Sized>(
    source: &mut S,
    corpus: &[TokenId],
    config: &EvalConfig,
    seed: RandomSeed,
) -> Result<BrierAccumulator, BrierError> {
    if config.max_order == 0 || config.stride == 0 {
        return Err(BrierError::InvalidConfig);
    }
    if corpus.len() <= config.max_order {
        return Err(BrierError::CorpusTooShort {
            len: corpus.len(),
            max_order: config.max_order,
        });
    }
    let mut acc = BrierAccumulator::new(config.max_order);
    for t in (0..corpus.len()).step_by(config.stride) {
        let mut rng = seed.derive(t as u64).rng();
        evaluate_position(source, corpus, t, config, &mut rng, &mut acc)?;
    }
    Ok(acc)
}

/// Brier-n / BrierLM report for one token sequence.
pub fn evaluate_corpus<S: Sampler + ?Sized>(
    source: &mut S,
    corpus: &[TokenId],
    config: &EvalConfig,
    seed: RandomSeed,
) -> Result<BrierReport, BrierError> {
    Ok(accumulate_corpus(source, corpus, config, seed)?.report())
}

/// Evaluates several documents and merges their sums. Document `d` uses
/// `seed.derive(d)`; documents not longer than `max_order` are skipped, and
/// an error is returned only when every document is too short.
pub fn evaluate_documents<S: Sampler + ?Sized>(
    source: &mut S,
    documents: &[Vec<TokenId>],
    config: &EvalConfig,
    seed: RandomSeed,
) -> Result<BrierReport, BrierError> {
    let mut total = BrierAccumulator::new(config.max_order);
    let mut used = 0;
    for (d, doc) in documents.iter().enumerate() {
        if doc.len() <= config.max_order {
            continue;
        }
        total.merge(&accumulate_corpus(source, doc, config, seed.derive(d as u64))?);
        used += 1;
    }
    if used == 0 {
        return Err(BrierError::CorpusTooShort {
            len: documents.iter().map(Vec::len).max().unwrap_or(0),
            max_order: config.max_order,
        });
    }
    Ok(total.report())
}
