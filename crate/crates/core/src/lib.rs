//! Likelihood-free sampling and evaluation for implicit discrete models.
//!
//! Everything here works from samples alone:
//!
//! - [`temp_exact`]: exact temperature sampling `P(x)^(1/T)/Z` by rejection,
//!   plus its closed-form cost and bound;
//! - [`temp_batch`]: the batch approximation for `T = 1/n`;
//! - [`brier`]: the two-sample Brier estimator, Brier-n and BrierLM;
//! - [`energy`]: energy score and energy loss over real vectors;
//! - [`extproto`]: a JSON-lines client for samplers living in another process.
//!
//! [`categorical`] provides explicit pmfs and the oracles every statistical
//! test compares against. Randomness is ChaCha8 throughout; see [`rng`].

pub mod brier;
pub mod categorical;
pub mod corpus;
pub mod energy;
pub mod extproto;
pub mod outcome;
pub mod rng;
pub mod sampler;
pub mod temp_batch;
pub mod temp_exact;

pub use categorical::{empirical_pmf, sample_categorical, tv_distance, DistError, ExplicitCategorical};
pub use outcome::{Outcome, TokenId};
pub use rng::{LfRng, RandomSeed};
pub use sampler::{ExplicitSampler, SampleError, Sampler, SamplerSource};
pub use temp_exact::InverseTemperature;
