//! Exact temperature sampling from a black-box sampler.
//!
//! The target is `P_T(x) = P(x)^(1/T) / Z_T` for `T ∈ (0, 1)`. With
//! `1/T = n + α` (integer part `n`, fractional part `α`), one attempt is:
//!
//! 1. draw `n` outcomes in a single sampler call; continue only if all are
//!    identical, giving a candidate `x*` (probability `P(x*)^n`);
//! 2. if `α > 0`, loop `i = 1, 2, …`: draw one outcome; accept if it equals
//!    `x*`, otherwise draw `u ~ U(0,1)` and reject when `u < α/i`. This coin
//!    lands on "accept" with probability `P(x*)^α`.
//!
//! Any rejection restarts from step 1 with no carried state. The random
//! stream is consumed in exactly that order: the sampler's draws for stage 1,
//! then per stage-2 iteration one sampler draw followed (on a mismatch) by one
//! uniform `f64`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::categorical::{DistError, ExplicitCategorical};
use crate::outcome::{Outcome, TokenId};
use crate::rng::{LfRng, RandomSeed};
use crate::sampler::{ExplicitSampler, SampleError, Sampler};

/// Default sampler-call budget per requested sample.
pub const DEFAULT_CALL_BUDGET: u64 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum ExactError {
    #[error("call budget exhausted after {calls_used} sampler calls")]
    BudgetExhausted { calls_used: u64 },
    #[error("call budget {budget} is below the {n} calls a single attempt needs")]
    BudgetBelowAttempt { budget: u64, n: u64 },
    #[error(transparent)]
    Sampler(#[from] SampleError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvTempError {
    #[error("inverse temperature must be written as p/q with positive integers, got {0:?}")]
    Syntax(String),
    #[error("inverse temperature {0}/{1} must exceed 1 (temperature in (0,1))")]
    OutOfRange(u64, u64),
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// An exact rational `p/q` in lowest terms with `0 < p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FractionalExponent {
    numerator: u64,
    denominator: u64,
}

impl FractionalExponent {
    pub fn new(numerator: u64, denominator: u64) -> Option<Self> {
        if numerator == 0 || denominator == 0 || numerator >= denominator {
            return None;
        }
        let g = gcd(numerator, denominator);
        Some(FractionalExponent {
            numerator: numerator / g,
            denominator: denominator / g,
        })
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn denominator(self) -> u64 {
        self.denominator
    }

    pub fn value(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `α / i` evaluated as one rounded division.
    #[inline]
    fn over(self, i: u64) -> f64 {
        self.numerator as f64 / (self.denominator as f64 * i as f64)
    }
}

/// Inverse temperature `1/T` as an exact rational greater than one.
///
/// Kept rational so that the integer/fractional split is exact: a float such
/// as `3.0000000000000004` would otherwise switch on the fractional stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InverseTemperature {
    numerator: u64,
    denominator: u64,
}

impl InverseTemperature {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self, InvTempError> {
        if numerator == 0 || denominator == 0 {
            return Err(InvTempError::Syntax(format!("{numerator}/{denominator}")));
        }
        if numerator <= denominator {
            return Err(InvTempError::OutOfRange(numerator, denominator));
        }
        let g = gcd(numerator, denominator);
        Ok(InverseTemperature {
            numerator: numerator / g,
            denominator: denominator / g,
        })
    }

    pub fn integer(n: u64) -> Result<Self, InvTempError> {
        Self::new(n, 1)
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn denominator(self) -> u64 {
        self.denominator
    }

    /// `n = ⌊1/T⌋`, always at least 1.
    pub fn integer_part(self) -> u64 {
        self.numerator / self.denominator
    }

    /// The fractional part `α = 1/T − n`, or `None` when `1/T` is an integer.
    pub fn fractional_part(self) -> Option<FractionalExponent> {
        FractionalExponent::new(self.numerator % self.denominator, self.denominator)
    }

    pub fn value(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn temperature(self) -> f64 {
        self.denominator as f64 / self.numerator as f64
    }

    /// `T ≤ 0.5`, decided exactly.
    pub fn regime(self) -> Regime {
        if self.numerator >= 2 * self.denominator {
            Regime::LowTemp
        } else {
            Regime::HighTemp
        }
    }
}

impl fmt::Display for InverseTemperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl FromStr for InverseTemperature {
    type Err = InvTempError;

    /// Accepts `p/q` or a bare integer `p`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let syntax = || InvTempError::Syntax(s.to_string());
        let parse = |t: &str| -> Result<u64, InvTempError> {
            let t = t.trim();
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(syntax());
            }
            t.parse().map_err(|_| syntax())
        };
        match s.split_once('/') {
            Some((p, q)) => Self::new(parse(p)?, parse(q)?),
            None => Self::new(parse(s)?, 1),
        }
    }
}

impl Serialize for InverseTemperature {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InverseTemperature {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `0 < T ≤ 0.5`
    LowTemp,
    /// `0.5 < T < 1`
    HighTemp,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::LowTemp => "low_temp",
            Regime::HighTemp => "high_temp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSample {
    pub outcome: Outcome,
    /// Sampler draws across all attempts, including rejected ones.
    pub calls_used: u64,
}

fn charge(calls: &mut u64, needed: u64, budget: u64) -> Result<(), ExactError> {
    if calls.saturating_add(needed) > budget {
        return Err(ExactError::BudgetExhausted { calls_used: *calls });
    }
    *calls += needed;
    Ok(())
}

/// Stage 2 for a fixed candidate: returns `true` with probability `P(candidate)^α`.
pub fn fractional_stage<S: Sampler + ?Sized>(
    source: &mut S,
    context: &[TokenId],
    candidate: &Outcome,
    alpha: FractionalExponent,
    rng: &mut LfRng,
    calls: &mut u64,
    budget: u64,
) -> Result<bool, ExactError> {
    let mut i: u64 = 1;
    loop {
        charge(calls, 1, budget)?;
        let draw = source.draw(context, 1, rng)?;
        let x = draw.first().ok_or(SampleError::WrongCount { expected: 1, got: 0 })?;
        if x == candidate {
            return Ok(true);
        }
        let u: f64 = rng.random();
        if u < alpha.over(i) {
            return Ok(false);
        }
        i += 1;
    }
}

/// One attempt (stage 1 then stage 2). `Ok(None)` is a rejection.
pub fn single_attempt<S: Sampler + ?Sized>(
    source: &mut S,
    context: &[TokenId],
    inv_temp: InverseTemperature,
    rng: &mut LfRng,
    calls: &mut u64,
    budget: u64,
) -> Result<Option<Outcome>, ExactError> {
    let n = inv_temp.integer_part();
    charge(calls, n, budget)?;
    let draws = source.draw(context, n as usize, rng)?;
    if draws.len() as u64 != n {
        return Err(SampleError::WrongCount {
            expected: n as usize,
            got: draws.len(),
        }
        .into());
    }
    let mut iter = draws.into_iter();
    let candidate = iter.next().expect("n >= 1");
    if iter.any(|x| x != candidate) {
        return Ok(None);
    }
    match inv_temp.fractional_part() {
        None => Ok(Some(candidate)),
        Some(alpha) => {
            let accepted = fractional_stage(source, context, &candidate, alpha, rng, calls, budget)?;
            Ok(accepted.then_some(candidate))
        }
    }
}

/// Draws one outcome from `P(x)^(1/T) / Z_T` using `rng`, restarting on rejection.
pub fn exact_temperature_sample_with_rng<S: Sampler + ?Sized>(
    source: &mut S,
    context: &[TokenId],
    inv_temp: InverseTemperature,
    rng: &mut LfRng,
    call_budget: u64,
) -> Result<ExactSample, ExactError> {
    let n = inv_temp.integer_part();
    if call_budget < n {
        return Err(ExactError::BudgetBelowAttempt { budget: call_budget, n });
    }
    let mut calls = 0;
    loop {
        if let Some(outcome) = single_attempt(source, context, inv_temp, rng, &mut calls, call_budget)? {
            return Ok(ExactSample {
                outcome,
                calls_used: calls,
            });
        }
    }
}

/// Context-free exact temperature sample seeded from `seed`.
pub fn exact_temperature_sample<S: Sampler + ?Sized>(
    source: &mut S,
    inv_temp: InverseTemperature,
    seed: RandomSeed,
    call_budget: u64,
) -> Result<ExactSample, ExactError> {
    exact_temperature_sample_with_rng(source, &[], inv_temp, &mut seed.rng(), call_budget)
}

/// `count` independent exact samples from an explicit pmf; sample `i` uses
/// `seed.derive(i)`, so results do not depend on thread scheduling.
pub fn exact_sample_many(
    dist: &ExplicitCategorical,
    inv_temp: InverseTemperature,
    count: usize,
    seed: RandomSeed,
    call_budget: u64,
) -> Result<Vec<ExactSample>, ExactError> {
    let sampler = ExplicitSampler::new(dist);
    let results: Vec<Result<ExactSample, ExactError>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut source = &sampler;
            exact_temperature_sample_with_rng(&mut source, &[], inv_temp, &mut seed.derive(i).rng(), call_budget)
        })
        .collect();
    // Sequential collect so the reported error is the lowest-index one.
    results.into_iter().collect()
}

/// The tempered pmf `P(x)^(1/T) / Z_T`.
pub fn target_distribution(dist: &ExplicitCategorical, inv_temp: InverseTemperature) -> ExplicitCategorical {
    let e = inv_temp.value();
    ExplicitCategorical::from_weights(dist.iter().map(|(o, p)| (o.clone(), p.powf(e))))
        .expect("positive weights on a non-empty support")
}

/// `Z_T = Σ P(x)^(1/T)`.
pub fn partition_function(dist: &ExplicitCategorical, inv_temp: InverseTemperature) -> f64 {
    dist.power_sum(inv_temp.value())
}

/// Closed-form expected sampler calls per accepted sample:
/// `(n + 𝟙(α>0) Σ P(x)^(1/T−1)) / Z_T`.
pub fn expected_calls(dist: &ExplicitCategorical, inv_temp: InverseTemperature) -> f64 {
    let z = partition_function(dist, inv_temp);
    let n = inv_temp.integer_part() as f64;
    let stage2 = match inv_temp.fractional_part() {
        Some(_) => dist.power_sum(inv_temp.value() - 1.0),
        None => 0.0,
    };
    (n + stage2) / z
}

/// Upper bound on [`expected_calls`]: `(1+n)/Z_T` for `T ≤ 0.5`,
/// `(1 + |X|^(2−1/T))/Z_T` for `0.5 < T < 1`.
pub fn cost_bound(dist: &ExplicitCategorical, inv_temp: InverseTemperature) -> f64 {
    let z = partition_function(dist, inv_temp);
    match inv_temp.regime() {
        Regime::LowTemp => (1.0 + inv_temp.integer_part() as f64) / z,
        Regime::HighTemp => {
            let support = dist.support_size() as f64;
            (1.0 + support.powf(2.0 - inv_temp.value())) / z
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub inv_temp: InverseTemperature,
    pub theoretical_expected_calls: f64,
    pub empirical_mean_calls: f64,
    pub trials: u64,
    pub bound: f64,
    pub regime: Regime,
}

impl CostReport {
    pub fn relative_error(&self) -> f64 {
        (self.empirical_mean_calls - self.theoretical_expected_calls).abs() / self.theoretical_expected_calls
    }
}

/// Runs `trials` exact samples and compares the mean call count with the
/// closed form. `hard_cap` bounds calls per sample; `None` means unbounded.
pub fn run_cost_experiment(
    dist: &ExplicitCategorical,
    inv_temp: InverseTemperature,
    trials: u64,
    seed: RandomSeed,
    hard_cap: Option<u64>,
) -> Result<CostReport, ExactError> {
    let samples = exact_sample_many(dist, inv_temp, trials as usize, seed, hard_cap.unwrap_or(u64::MAX))?;
    Ok(cost_report_from_samples(dist, inv_temp, &samples))
}

pub fn cost_report_from_samples(
    dist: &ExplicitCategorical,
    inv_temp: InverseTemperature,
    samples: &[ExactSample],
) -> CostReport {
    let total: u64 = samples.iter().map(|s| s.calls_used).sum();
    CostReport {
        inv_temp,
        theoretical_expected_calls: expected_calls(dist, inv_temp),
        empirical_mean_calls: total as f64 / samples.len().max(1) as f64,
        trials: samples.len() as u64,
        bound: cost_bound(dist, inv_temp),
        regime: inv_temp.regime(),
    }
}

/// Empirical acceptance rate of the fractional stage in isolation, with a
/// two-outcome sampler whose candidate has probability `p`. Converges to `p^α`.
pub fn stage2_acceptance_probe(
    p: f64,
    alpha: FractionalExponent,
    trials: u64,
    seed: RandomSeed,
) -> Result<f64, DistError> {
    let candidate = Outcome::token(0);
    let dist = if p >= 1.0 {
        ExplicitCategorical::point(candidate.clone())
    } else {
        ExplicitCategorical::new(vec![(candidate.clone(), p), (Outcome::token(1), 1.0 - p)])?
    };
    let sampler = ExplicitSampler::new(&dist);
    let accepted: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut source = &sampler;
            let mut calls = 0;
            let ok = fractional_stage(
                &mut source,
                &[],
                &candidate,
                alpha,
                &mut seed.derive(i).rng(),
                &mut calls,
                u64::MAX,
            )
            .expect("explicit sampler cannot fail");
            u64::from(ok)
        })
        .sum();
    Ok(accepted as f64 / trials as f64)
}
