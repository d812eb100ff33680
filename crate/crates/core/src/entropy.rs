//! Entropy functionals, the purity coefficient and l1-coherence.
//!
//! All entropies are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{check_dim, max_abs, measurement_probs, PureState, UnitaryMatrix};

/// Entries this far below zero are treated as rounding noise.
pub const NEG_TOL: f64 = 1e-14;
/// Entries below this are exact zeros inside logarithms.
pub const ZERO_CUTOFF: f64 = 1e-15;
const SUM_TOL: f64 = 1e-12;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    /// Validates `probs`; entries in `[-1e-14, 0)` are clamped to zero and the
    /// vector renormalized.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("empty probability vector".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < -NEG_TOL) {
            return Err(Error::Domain(format!("negative or non-finite probability {bad}")));
        }
        let sum: f64 = probs.iter().map(|p| p.max(0.0)).sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::Domain(format!("probabilities sum to {sum}")));
        }
        Ok(Self::from_weights_clamped(probs))
    }

    /// Clamps negatives to zero and renormalizes. The caller guarantees the
    /// weights come from a normalized amplitude vector.
    pub(crate) fn from_weights_clamped(mut probs: Vec<f64>) -> Self {
        for p in probs.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if sum > 0.0 && sum != 1.0 {
            for p in probs.iter_mut() {
                *p /= sum;
            }
        }
        Self { probs }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.probs
    }
}

/// Ordered collection of same-dimension bases whose first member is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    dim: usize,
    unitaries: Vec<UnitaryMatrix>,
}

impl MeasurementSet {
    pub fn new(unitaries: Vec<UnitaryMatrix>) -> Result<Self> {
        let first = unitaries.first().ok_or_else(|| Error::Precondition("measurement set needs at least one basis".into()))?;
        let dim = first.dim();
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        for u in &unitaries {
            check_dim(dim, u.dim())?;
        }
        if first.distance_to_identity() > 1e-12 {
            return Err(Error::Precondition("first basis must be the identity".into()));
        }
        Ok(Self { dim, unitaries })
    }

    /// Prepends the identity to `rest`.
    pub fn with_identity(rest: Vec<UnitaryMatrix>) -> Result<Self> {
        let dim = rest.first().map(UnitaryMatrix::dim).ok_or_else(|| Error::Precondition("no bases given".into()))?;
        let mut all = Vec::with_capacity(rest.len() + 1);
        all.push(UnitaryMatrix::identity(dim));
        all.extend(rest);
        Self::new(all)
    }

    /// Re-expresses arbitrary bases relative to the first one: `U_k -> U_1^dagger U_k`.
    /// Entropy landscapes are unchanged up to the state relabeling `psi -> U_1^dagger psi`.
    pub fn relative_to_first(unitaries: Vec<UnitaryMatrix>) -> Result<Self> {
        let first = unitaries.first().cloned().ok_or_else(|| Error::Precondition("measurement set needs at least one basis".into()))?;
        let mut rotated = Vec::with_capacity(unitaries.len());
        for u in &unitaries {
            let m = first.overlap(u)?;
            rotated.push(UnitaryMatrix::new_unchecked(m));
        }
        rotated[0] = UnitaryMatrix::identity(first.dim());
        Self::new(rotated)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of bases `L`.
    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitaries(&self) -> &[UnitaryMatrix] {
        &self.unitaries
    }

    /// Whether every pair of bases is unbiased within `tol`.
    pub fn is_pairwise_unbiased(&self, tol: f64) -> bool {
        let n = self.dim as f64;
        let us = &self.unitaries;
        (0..us.len()).all(|i| {
            (i + 1..us.len()).all(|j| {
                let o = us[i].matrix().ad_mul(us[j].matrix());
                o.iter().all(|z| (z.norm_sqr() - 1.0 / n).abs() <= tol)
            })
        })
    }

    /// Max-norm distance between the bases of two sets of equal shape.
    pub fn distance(&self, other: &MeasurementSet) -> f64 {
        if self.len() != other.len() || self.dim != other.dim {
            return f64::INFINITY;
        }
        self.unitaries.iter().zip(&other.unitaries).map(|(a, b)| max_abs(&(a.matrix() - b.matrix()))).fold(0.0, f64::max)
    }
}

/// `-sum p ln p` over raw weights, with entries below [`ZERO_CUTOFF`] skipped.
pub(crate) fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > ZERO_CUTOFF).map(|&x| -x * x.ln()).sum::<f64>().max(0.0)
}

/// Shannon entropy `-sum p_i ln p_i` with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    shannon(p.as_slice())
}

/// Tsallis entropy `(1 - sum p_i^beta) / (beta - 1)`.
pub fn tsallis_entropy(p: &ProbabilityVector, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || beta == 1.0 || !beta.is_finite() {
        return Err(Error::Domain(format!("Tsallis order must be positive and != 1, got {beta}")));
    }
    let s: f64 = p.as_slice().iter().map(|x| x.powf(beta)).sum();
    Ok((1.0 - s) / (beta - 1.0))
}

/// `sum_i p_i^2`, the order-2 Tsallis complement.
pub(crate) fn collision(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum()
}

fn probs_per_basis(state: &PureState, ms: &MeasurementSet) -> Result<Vec<ProbabilityVector>> {
    check_dim(ms.dim(), state.dim())?;
    ms.unitaries().iter().map(|u| measurement_probs(state, u)).collect()
}

/// Average Shannon entropy `(1/L) sum_k S(p^(k))`.
pub fn average_entropy(state: &PureState, ms: &MeasurementSet) -> Result<f64> {
    let ps = probs_per_basis(state, ms)?;
    Ok(ps.iter().map(shannon_entropy).sum::<f64>() / ms.len() as f64)
}

/// `P = sum_{k,i} (p_i^(k) / L)^2`.
pub fn purity_coefficient(state: &PureState, ms: &MeasurementSet) -> Result<f64> {
    let ps = probs_per_basis(state, ms)?;
    let l = ms.len() as f64;
    Ok(ps.iter().map(|p| collision(p.as_slice())).sum::<f64>() / (l * l))
}

/// l1-norm of coherence of a pure state, `(sum_i |psi_i|)^2 - 1`.
pub fn l1_coherence(state: &PureState) -> f64 {
    let s: f64 = state.amplitudes().iter().map(|z| z.norm()).sum();
    (s * s - 1.0).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    /// `eps = 1 - |<psi_coh|xi>|^2`.
    Overlap,
    /// Every amplitude phase is off by at most `eps` radians.
    Phase,
}

/// Lower bound on the l1-coherence of a state that deviates from a maximally
/// coherent one by `eps`.
pub fn coherence_error_bound(n: usize, eps: f64, kind: ErrorKind) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let nf = n as f64;
    match kind {
        ErrorKind::Overlap => {
            if !(0.0..=1.0).contains(&eps) {
                return Err(Error::Domain(format!("overlap error must lie in [0, 1], got {eps}")));
            }
            Ok(nf - 1.0 - eps * nf)
        }
        ErrorKind::Phase => {
            if !(eps >= 0.0) || !eps.is_finite() {
                return Err(Error::Domain(format!("phase error must be >= 0, got {eps}")));
            }
            let c = if n.is_multiple_of(2) { 1.0 } else { 1.0 - 1.0 / (nf * nf) };
            Ok((nf - 1.0 - nf * c * eps.sin().powi(2)).max(0.0))
        }
    }
}
