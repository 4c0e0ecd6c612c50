//! The black-box sampler interface.
//!
//! Algorithms in this crate only ever call [`Sampler::draw`]. They never see
//! probabilities, which is what makes them usable with implicit models hosted
//! in another process (see [`crate::extproto`]).

use std::collections::BTreeMap;

use crate::categorical::{CategoricalTable, ExplicitCategorical};
use crate::extproto::{ExternalSampler, ProtoError};
use crate::outcome::{Outcome, TokenId};
use crate::rng::LfRng;

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error(transparent)]
    Protocol(#[from] ProtoError),
    #[error("sampler returned an empty outcome")]
    EmptyOutcome,
    #[error("sampler returned {got} outcomes, {expected} requested")]
    WrongCount { expected: usize, got: usize },
}

/// A source of i.i.d. outcomes, optionally conditioned on a token context.
///
/// Randomness is always taken from the caller's `rng`, so a fixed seed and a
/// fixed call sequence reproduce the same stream. Explicit samplers consume
/// one `f64` per outcome; external samplers consume one `u64` per call, which
/// is forwarded to the child as the request seed.
pub trait Sampler {
    fn draw(&mut self, context: &[TokenId], count: usize, rng: &mut LfRng) -> Result<Vec<Outcome>, SampleError>;

    /// Draws `count` outcomes and returns only their counts.
    fn draw_counts(
        &mut self,
        context: &[TokenId],
        count: usize,
        rng: &mut LfRng,
    ) -> Result<BTreeMap<Outcome, u64>, SampleError> {
        let mut counts = BTreeMap::new();
        for o in self.draw(context, count, rng)? {
            *counts.entry(o).or_default() += 1;
        }
        Ok(counts)
    }
}

impl<S: Sampler + ?Sized> Sampler for &mut S {
    fn draw(&mut self, context: &[TokenId], count: usize, rng: &mut LfRng) -> Result<Vec<Outcome>, SampleError> {
        (**self).draw(context, count, rng)
    }

    fn draw_counts(
        &mut self,
        context: &[TokenId],
        count: usize,
        rng: &mut LfRng,
    ) -> Result<BTreeMap<Outcome, u64>, SampleError> {
        (**self).draw_counts(context, count, rng)
    }
}

impl<S: Sampler + ?Sized> Sampler for Box<S> {
    fn draw(&mut self, context: &[TokenId], count: usize, rng: &mut LfRng) -> Result<Vec<Outcome>, SampleError> {
        (**self).draw(context, count, rng)
    }

    fn draw_counts(
        &mut self,
        context: &[TokenId],
        count: usize,
        rng: &mut LfRng,
    ) -> Result<BTreeMap<Outcome, u64>, SampleError> {
        (**self).draw_counts(context, count, rng)
    }
}

/// Context-free sampler backed by an explicit pmf.
#[derive(Debug, Clone)]
pub struct ExplicitSampler {
    table: CategoricalTable,
}

impl ExplicitSampler {
    pub fn new(dist: &ExplicitCategorical) -> Self {
        ExplicitSampler {
            table: CategoricalTable::new(dist),
        }
    }

    fn draw_into(&self, count: usize, rng: &mut LfRng) -> Vec<Outcome> {
        (0..count).map(|_| self.table.draw(rng).clone()).collect()
    }

    fn counts_into(&self, count: usize, rng: &mut LfRng) -> BTreeMap<Outcome, u64> {
        let mut tally = vec![0u64; self.table.outcomes().len()];
        for _ in 0..count {
            tally[self.table.draw_index(rng)] += 1;
        }
        self.table
            .outcomes()
            .iter()
            .zip(tally)
            .filter(|(_, c)| *c > 0)
            .map(|(o, c)| (o.clone(), c))
            .collect()
    }
}

impl Sampler for ExplicitSampler {
    fn draw(&mut self, _context: &[TokenId], count: usize, rng: &mut LfRng) -> Result<Vec<Outcome>, SampleError> {
        Ok(self.draw_into(count, rng))
    }

    fn draw_counts(
        &mut self,
        _context: &[TokenId],
        count: usize,
        rng: &mut LfRng,
    ) -> Result<BTreeMap<Outcome, u64>, SampleError> {
        Ok(self.counts_into(count, rng))
    }
}

impl Sampler for &ExplicitSampler {
    fn draw(&mut self, _context: &[TokenId], count: usize, rng: &mut LfRng) -> Result<Vec<Outcome>, SampleError> {
        Ok(self.draw_into(count, rng))
    }

    fn draw_counts(
        &mut self,
        _context: &[TokenId],
        count: usize,
        rng: &mut LfRng,
    ) -> Result<BTreeMap<Outcome, u64>, SampleError> {
        Ok(self.counts_into(count, rng))
    }
}

/// Either an in-process explicit pmf or a child process speaking the wire protocol.
pub enum SamplerSource {
    Explicit(ExplicitSampler),
    External(ExternalSampler),
}

impl SamplerSource {
    pub fn explicit(dist: &ExplicitCategorical) -> Self {
        SamplerSource::Explicit(ExplicitSampler::new(dist))
    }
}

impl Sampler for SamplerSource {
    fn draw(&mut self, context: &[TokenId], count: usize, rng: &mut LfRng) -> Result<Vec<Outcome>, SampleError> {
        match self {
            SamplerSource::Explicit(s) => s.draw(context, count, rng),
            SamplerSource::External(s) => s.draw(context, count, rng),
        }
    }

    fn draw_counts(
        &mut self,
        context: &[TokenId],
        count: usize,
        rng: &mut LfRng,
    ) -> Result<BTreeMap<Outcome, u64>, SampleError> {
        match self {
            SamplerSource::Explicit(s) => s.draw_counts(context, count, rng),
            SamplerSource::External(s) => s.draw_counts(context, count, rng),
        }
    }
}
