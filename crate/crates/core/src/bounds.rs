//! Analytic entropy bounds: Maassen-Uffink, purity-based certainty and
//! uncertainty bounds, Sanchez-Ruiz bounds for complete MUB sets, and the
//! Haar-average entropy.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::entropy::{shannon, MeasurementSet};
use crate::error::{Error, Result};
use crate::qstate::{su_generators, HermitianBasis};

/// Tolerance used to decide whether a set is a complete set of MUBs.
pub const MUB_TOL: f64 = 1e-10;

/// Analytic bounds for one measurement set (entropies in nats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub maassen_uffink: Option<f64>,
    pub m_min: f64,
    pub m_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub r: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub sr_min: Option<f64>,
    pub sr_max: Option<f64>,
}

/// `-ln max_ij |(U_1^dagger U_2)_ij|`, a lower bound on `(S_1 + S_2)/2`.
pub fn maassen_uffink_bound(ms: &MeasurementSet) -> Result<f64> {
    if ms.len() != 2 {
        return Err(Error::Unsupported(format!("Maassen-Uffink bound needs L = 2, got {}", ms.len())));
    }
    let u = ms.unitaries();
    let c = u[0].overlap(&u[1])?.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    Ok((-c.ln()).max(0.0))
}

/// `M_{ab} = sum_k sum_i <u_ki|s_a|u_ki> <u_ki|s_b|u_ki>` over the basis
/// vectors `u_ki` (columns of `U_k`), symmetrized.
pub fn m_matrix_with(ms: &MeasurementSet, basis: &HermitianBasis) -> Result<DMatrix<f64>> {
    if basis.dim() != ms.dim() {
        return Err(Error::ShapeMismatch { expected: ms.dim(), got: basis.dim() });
    }
    let g = basis.len();
    let mut m = DMatrix::<f64>::zeros(g, g);
    let mut t = vec![0.0; g];
    for u in ms.unitaries() {
        for col in u.matrix().column_iter() {
            let v = col.into_owned();
            for (ta, s) in t.iter_mut().zip(basis.generators()) {
                *ta = v.dotc(&(s * &v)).re;
            }
            for a in 0..g {
                for b in 0..g {
                    m[(a, b)] += t[a] * t[b];
                }
            }
        }
    }
    Ok((&m + m.transpose()) * 0.5)
}

/// [`m_matrix_with`] in the standard generalized Gell-Mann basis.
pub fn m_matrix(ms: &MeasurementSet) -> DMatrix<f64> {
    let basis = su_generators(ms.dim()).expect("measurement sets have dim >= 2");
    m_matrix_with(ms, &basis).expect("matching dimensions")
}

fn m_extremes(ms: &MeasurementSet) -> (f64, f64) {
    let eig = SymmetricEigen::new(m_matrix(ms)).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn purity_from_m(l: f64, n: f64, m: f64) -> f64 {
    1.0 / (l * n) + (n - 1.0) / (2.0 * n * l * l) * m
}

/// Extreme values `(P_min, P_max)` of the purity coefficient over all pure states.
pub fn purity_bounds(ms: &MeasurementSet) -> (f64, f64) {
    let (lo, hi) = m_extremes(ms);
    let (l, n) = (ms.len() as f64, ms.dim() as f64);
    (purity_from_m(l, n, lo), purity_from_m(l, n, hi))
}

fn x_ln_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Smallest Shannon entropy of `L`-rescaled probabilities with collision sum `L P`.
fn b_min_from_purity(l: f64, p_max: f64) -> f64 {
    let lp = l * p_max;
    let inv = 1.0 / lp;
    let k = inv.floor();
    let a = inv - k;
    (lp * (a * x_ln_x(k + 1.0) + (1.0 - a) * x_ln_x(k))).max(0.0)
}

/// Largest Shannon entropy given `P_min`; returns `(r, B_max)`.
fn b_max_from_purity(l: f64, n: f64, p_min: f64) -> (f64, f64) {
    let ln_total = l * n;
    let r = ((ln_total * p_min - 1.0) / (ln_total - 1.0)).clamp(0.0, 1.0);
    let sr = r.sqrt();
    let big = (1.0 + (ln_total - 1.0) * sr) / ln_total;
    let small = (1.0 - sr) / ln_total;
    let count = (ln_total - 1.0).round() as usize;
    let mut q = vec![small; count + 1];
    q[0] = big;
    (r, (shannon(&q) - l.ln()).clamp(0.0, n.ln()))
}

/// Full analytic report: purity-based bounds for any set, plus the
/// Maassen-Uffink bound for `L = 2` and Sanchez-Ruiz bounds for complete MUB sets.
pub fn certainty_uncertainty_bounds(ms: &MeasurementSet) -> BoundsReport {
    let (l, n) = (ms.len(), ms.dim());
    let (lf, nf) = (l as f64, n as f64);
    let (m_min, m_max) = m_extremes(ms);
    let p_min = purity_from_m(lf, nf, m_min);
    let p_max = purity_from_m(lf, nf, m_max);
    let b_min = b_min_from_purity(lf, p_max);
    let (r, b_max) = b_max_from_purity(lf, nf, p_min);
    let (sr_min, sr_max) = if is_complete_mub_set(ms, MUB_TOL) {
        let (lo, hi) = sanchez_ruiz_bounds(n).expect("n >= 2");
        (Some(lo), Some(hi))
    } else {
        (None, None)
    };
    BoundsReport { l, n, maassen_uffink: maassen_uffink_bound(ms).ok(), m_min, m_max, p_min, p_max, r, b_min, b_max, sr_min, sr_max }
}

/// Whether `ms` holds `N + 1` pairwise unbiased bases.
pub fn is_complete_mub_set(ms: &MeasurementSet, tol: f64) -> bool {
    ms.len() == ms.dim() + 1 && ms.is_pairwise_unbiased(tol)
}

/// Sanchez-Ruiz lower and upper bounds on the average entropy of a complete
/// set of `N + 1` mutually unbiased bases.
pub fn sanchez_ruiz_bounds(n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Domain(format!("Sanchez-Ruiz bounds need N >= 2, got {n}")));
    }
    let nf = n as f64;
    if n == 2 {
        let lo = 2.0 / 3.0 * 2f64.ln();
        let hi = 0.5 * 6f64.ln() - (2.0 + 3f64.sqrt()).ln() / (2.0 * 3f64.sqrt());
        return Ok((lo, hi));
    }
    let lo = if n % 2 == 1 {
        ((nf + 1.0) / 2.0).ln()
    } else {
        let h = nf / 2.0;
        nf / (2.0 * (nf + 1.0)) * h.ln() + (h + 1.0) / (nf + 1.0) * (h + 1.0).ln()
    };
    let hi = nf.ln() - (nf - 1.0).powi(2) * (nf - 1.0).ln() / ((nf + 1.0) * nf * (nf - 2.0));
    Ok((lo, hi))
}

/// Mean Shannon entropy of a Haar-random pure state in any fixed basis,
/// `psi(N+1) - psi(2) = H_N - 1`.
pub fn haar_mean_entropy(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok((2..=n).map(|k| 1.0 / k as f64).sum())
}
