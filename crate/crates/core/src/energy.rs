//! Energy score and the energy-loss estimator over real vectors.
//!
//! For a predictive distribution `P` and observation `y`, the energy score
//! (higher is better) is
//!
//! ```text
//! S(P, y) = E‖x′ − x″‖^a − 2 E‖x − y‖^a,    x, x′, x″ ~ P i.i.d.
//! ```
//!
//! strictly proper for `a ∈ (0, 2)` and merely proper at `a = 2`. The energy
//! loss (lower is better) is its Monte Carlo estimate with the sign flipped,
//! from `N ≥ 2` model samples `z̃` and `M ≥ 1` target samples `z`:
//!
//! ```text
//! L = 2/(NM) Σ_n Σ_m ‖z_m − z̃_n‖^a − 1/(N(N−1)) Σ_{n≠k} ‖z̃_n − z̃_k‖^a
//! ```
//!
//! where the second sum runs over ordered pairs. Its expectation is
//! `−E_y[S(P, y)]` for `y` drawn from the target distribution.
//!
//! The exponent is called `energy_alpha` here so it is never confused with
//! the fractional part of an inverse temperature.

use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum EnergyError {
    #[error("pairwise term undefined: need at least 2 model samples, got {0}")]
    PairwiseTermUndefined(usize),
    #[error("no target samples")]
    NoTargets,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector has no components")]
    EmptyVector,
    #[error("vector component {0} is not finite")]
    NonFinite(f64),
    #[error("energy exponent {0} outside (0, 2]")]
    InvalidAlpha(f64),
    #[error("no batches")]
    NoBatches,
    #[error("invalid distribution: {0}")]
    InvalidDist(String),
    #[error("batch file: {0}")]
    Io(#[from] std::io::Error),
    #[error("batch file: {0}")]
    Json(#[from] serde_json::Error),
}

/// A finite real vector of dimension at least 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(components: Vec<f64>) -> Result<Self, EnergyError> {
        if components.is_empty() {
            return Err(EnergyError::EmptyVector);
        }
        if let Some(&bad) = components.iter().find(|c| !c.is_finite()) {
            return Err(EnergyError::NonFinite(bad));
        }
        Ok(RealVector(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = EnergyError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        RealVector::new(v)
    }
}

impl From<RealVector> for Vec<f64> {
    fn from(v: RealVector) -> Self {
        v.0
    }
}

fn check_alpha(energy_alpha: f64) -> Result<(), EnergyError> {
    if energy_alpha > 0.0 && energy_alpha <= 2.0 {
        Ok(())
    } else {
        Err(EnergyError::InvalidAlpha(energy_alpha))
    }
}

/// `‖a − b‖^energy_alpha` (Euclidean).
#[inline]
pub fn distance_pow(a: &RealVector, b: &RealVector, energy_alpha: f64) -> f64 {
    let sq: f64 = a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum();
    if energy_alpha == 2.0 {
        sq
    } else if energy_alpha == 1.0 {
        sq.sqrt()
    } else {
        sq.powf(energy_alpha / 2.0)
    }
}

/// Model and target samples for one position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBatch")]
pub struct VectorBatch {
    model_samples: Vec<RealVector>,
    target_samples: Vec<RealVector>,
}

#[derive(Deserialize)]
struct RawBatch {
    model_samples: Vec<RealVector>,
    target_samples: Vec<RealVector>,
}

impl TryFrom<RawBatch> for VectorBatch {
    type Error = EnergyError;

    fn try_from(raw: RawBatch) -> Result<Self, Self::Error> {
        VectorBatch::new(raw.model_samples, raw.target_samples)
    }
}

impl VectorBatch {
    pub fn new(model_samples: Vec<RealVector>, target_samples: Vec<RealVector>) -> Result<Self, EnergyError> {
        if model_samples.len() < 2 {
            return Err(EnergyError::PairwiseTermUndefined(model_samples.len()));
        }
        if target_samples.is_empty() {
            return Err(EnergyError::NoTargets);
        }
        let dim = model_samples[0].dim();
        for v in model_samples.iter().chain(&target_samples) {
            if v.dim() != dim {
                return Err(EnergyError::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
        }
        Ok(VectorBatch {
            model_samples,
            target_samples,
        })
    }

    /// Convenience constructor from raw component lists.
    pub fn from_rows(model: &[&[f64]], target: &[&[f64]]) -> Result<Self, EnergyError> {
        let conv = |rows: &[&[f64]]| -> Result<Vec<RealVector>, EnergyError> {
            rows.iter().map(|r| RealVector::new(r.to_vec())).collect()
        };
        VectorBatch::new(conv(model)?, conv(target)?)
    }

    pub fn model_samples(&self) -> &[RealVector] {
        &self.model_samples
    }

    pub fn target_samples(&self) -> &[RealVector] {
        &self.target_samples
    }

    pub fn dim(&self) -> usize {
        self.model_samples[0].dim()
    }
}

/// Energy loss of one batch.
pub fn energy_loss(batch: &VectorBatch, energy_alpha: f64) -> Result<f64, EnergyError> {
    check_alpha(energy_alpha)?;
    let model = &batch.model_samples;
    let target = &batch.target_samples;
    let (n, m) = (model.len() as f64, target.len() as f64);

    let mut fidelity = 0.0;
    for z in target {
        for zt in model {
            fidelity += distance_pow(z, zt, energy_alpha);
        }
    }
    // Each unordered pair appears twice among the ordered pairs.
    let mut diversity = 0.0;
    for (i, a) in model.iter().enumerate() {
        for b in &model[i + 1..] {
            diversity += 2.0 * distance_pow(a, b, energy_alpha);
        }
    }
    Ok(2.0 / (n * m) * fidelity - diversity / (n * (n - 1.0)))
}

/// Sum of per-position losses.
pub fn sequence_energy_loss(batches: &[VectorBatch], energy_alpha: f64) -> Result<f64, EnergyError> {
    if batches.is_empty() {
        return Err(EnergyError::NoBatches);
    }
    batches.iter().map(|b| energy_loss(b, energy_alpha)).sum()
}

/// Reads a batch file holding either one batch object or an array of them.
pub fn load_batches(path: impl AsRef<Path>) -> Result<Vec<VectorBatch>, EnergyError> {
    parse_batches(&std::fs::read_to_string(path)?)
}

pub fn parse_batches(text: &str) -> Result<Vec<VectorBatch>, EnergyError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<VectorBatch>),
        One(VectorBatch),
    }
    let parsed: OneOrMany = serde_json::from_str(text)?;
    let batches = match parsed {
        OneOrMany::One(b) => vec![b],
        OneOrMany::Many(v) => v,
    };
    if batches.is_empty() {
        return Err(EnergyError::NoBatches);
    }
    Ok(batches)
}

/// A pmf over finitely many distinct vectors of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteVectorDist {
    atoms: Vec<(RealVector, f64)>,
}

impl DiscreteVectorDist {
    pub fn new(atoms: Vec<(RealVector, f64)>) -> Result<Self, EnergyError> {
        if atoms.is_empty() {
            return Err(EnergyError::InvalidDist("no atoms".into()));
        }
        let dim = atoms[0].0.dim();
        let mut total = 0.0;
        for (i, (v, p)) in atoms.iter().enumerate() {
            if v.dim() != dim {
                return Err(EnergyError::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
            if !p.is_finite() || *p < 0.0 {
                return Err(EnergyError::InvalidDist(format!("probability {p}")));
            }
            if atoms[..i].iter().any(|(w, _)| w == v) {
                return Err(EnergyError::InvalidDist(format!("duplicate atom {:?}", v.components())));
            }
            total += p;
        }
        if (total - 1.0).abs() > crate::categorical::MASS_TOLERANCE {
            return Err(EnergyError::InvalidDist(format!("mass {total}")));
        }
        Ok(DiscreteVectorDist { atoms })
    }

    /// Uniform over the given points.
    pub fn uniform(points: Vec<RealVector>) -> Result<Self, EnergyError> {
        let p = 1.0 / points.len().max(1) as f64;
        Self::new(points.into_iter().map(|v| (v, p)).collect())
    }

    pub fn point(v: RealVector) -> Self {
        DiscreteVectorDist { atoms: vec![(v, 1.0)] }
    }

    pub fn atoms(&self) -> &[(RealVector, f64)] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].0.dim()
    }
}

/// `S(P, y)` by enumerating the support of `P`.
pub fn exact_energy_score(p: &DiscreteVectorDist, y: &RealVector, energy_alpha: f64) -> Result<f64, EnergyError> {
    check_alpha(energy_alpha)?;
    if y.dim() != p.dim() {
        return Err(EnergyError::DimensionMismatch {
            expected: p.dim(),
            got: y.dim(),
        });
    }
    let mut spread = 0.0;
    for (a, pa) in &p.atoms {
        for (b, pb) in &p.atoms {
            spread += pa * pb * distance_pow(a, b, energy_alpha);
        }
    }
    let fit: f64 = p.atoms.iter().map(|(x, px)| px * distance_pow(x, y, energy_alpha)).sum();
    Ok(spread - 2.0 * fit)
}

/// `E_{y~Q}[S(P, y)]`, exact.
pub fn expected_energy_score(p: &DiscreteVectorDist, q: &DiscreteVectorDist, energy_alpha: f64) -> Result<f64, EnergyError> {
    let mut total = 0.0;
    for (y, qy) in &q.atoms {
        total += qy * exact_energy_score(p, y, energy_alpha)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProprietyReport {
    /// `E_{y~Q}[S(Q, y)]`
    pub true_score: f64,
    /// `E_{y~Q}[S(P_i, y)]` for each candidate, in input order.
    pub candidate_scores: Vec<f64>,
}

impl ProprietyReport {
    /// True when no candidate beats the true distribution by more than `tol`.
    pub fn truth_is_maximal(&self, tol: f64) -> bool {
        self.candidate_scores.iter().all(|&s| s <= self.true_score + tol)
    }
}

/// Expected scores of the true distribution and each candidate under `q_true`.
pub fn propriety_probe(
    q_true: &DiscreteVectorDist,
    candidates: &[DiscreteVectorDist],
    energy_alpha: f64,
) -> Result<ProprietyReport, EnergyError> {
    let true_score = expected_energy_score(q_true, q_true, energy_alpha)?;
    let candidate_scores = candidates
        .iter()
        .map(|c| {
            if c.dim() != q_true.dim() {
                return Err(EnergyError::DimensionMismatch {
                    expected: q_true.dim(),
                    got: c.dim(),
                });
            }
            expected_energy_score(c, q_true, energy_alpha)
        })
        .collect::<Result<_, _>>()?;
    Ok(ProprietyReport {
        true_score,
        candidate_scores,
    })
}
