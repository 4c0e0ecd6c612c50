//! Fixtures shared by the benchmarks in `benches/`.

use lfree::energy::{RealVector, VectorBatch};
use lfree::{ExplicitCategorical, Outcome, RandomSeed, TokenId};
use rand::Rng;

/// Zipf-like pmf over `k` single-token outcomes, `p(i) ∝ 1/(i+1)`.
pub fn zipf_pmf(k: u32) -> ExplicitCategorical {
    ExplicitCategorical::from_weights((0..k).map(|i| (Outcome::token(i), 1.0 / f64::from(i + 1)))).expect("k >= 1")
}

/// Zipf-like pmf over `k` chunks of `len` tokens each.
pub fn zipf_chunks(k: u32, len: usize) -> ExplicitCategorical {
    ExplicitCategorical::from_weights((0..k).map(|i| {
        let tokens: Vec<TokenId> = (0..len as u32).map(|j| (i + j) % 256).collect();
        (Outcome::new(tokens), 1.0 / f64::from(i + 1))
    }))
    .expect("k >= 1")
}

/// Pseudo-random byte corpus of `len` tokens over a small alphabet.
pub fn corpus(len: usize, seed: u64) -> Vec<TokenId> {
    let mut rng = RandomSeed(seed).rng();
    (0..len).map(|_| rng.random_range(0..16)).collect()
}

/// Batch of `n` model and `m` target Gaussian-ish vectors in `dim` dimensions.
pub fn vector_batch(n: usize, m: usize, dim: usize, seed: u64) -> VectorBatch {
    let mut rng = RandomSeed(seed).rng();
    let mut draw = |count: usize| -> Vec<RealVector> {
        (0..count)
            .map(|_| RealVector::new((0..dim).map(|_| rng.random::<f64>() - 0.5).collect()).expect("finite"))
            .collect()
    };
    let model = draw(n);
    let target = draw(m);
    VectorBatch::new(model, target).expect("valid batch")
}
