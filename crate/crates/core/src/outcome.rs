use std::fmt;

use serde::{Deserialize, Serialize};

/// Token identifier. Byte-level corpora use the byte value directly.
pub type TokenId = u32;

/// An atomic discrete sample: a sequence of token ids compared as a whole.
///
/// A chunk of `K` tokens, an n-gram cut from a continuation, and a
/// single-token categorical outcome are all `Outcome`s. Ordering is
/// lexicographic, which gives every count map a canonical iteration order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Outcome(Vec<TokenId>);

impl Outcome {
    /// Panics if `tokens` is empty; use [`Outcome::try_new`] for untrusted input.
    pub fn new(tokens: Vec<TokenId>) -> Self {
        assert!(!tokens.is_empty(), "an outcome holds at least one token");
        Outcome(tokens)
    }

    pub fn try_new(tokens: Vec<TokenId>) -> Option<Self> {
        if tokens.is_empty() {
            None
        } else {
            Some(Outcome(tokens))
        }
    }

    /// Single-token outcome.
    pub fn token(id: TokenId) -> Self {
        Outcome(vec![id])
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The first `n` tokens as a new outcome, or `None` when shorter than `n`.
    pub fn prefix(&self, n: usize) -> Option<Outcome> {
        if n == 0 || n > self.0.len() {
            None
        } else {
            Some(Outcome(self.0[..n].to_vec()))
        }
    }

    pub fn into_tokens(self) -> Vec<TokenId> {
        self.0
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl From<TokenId> for Outcome {
    fn from(id: TokenId) -> Self {
        Outcome::token(id)
    }
}
