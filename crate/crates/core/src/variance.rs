//! Moments of order-2 Tsallis entropies over Haar-random pure states:
//! Monte Carlo estimators and the closed-form fourth moment of the unitary group.

use serde::{Deserialize, Serialize};

use crate::entropy::{collision, MeasurementSet};
use crate::error::{Error, Result};
use crate::qstate::{haar_state, UnitaryMatrix};
use crate::stats;

const MIN_SAMPLES: usize = 100;

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::Precondition(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    Ok(())
}

/// `sum_ij |u_ij|^4`; at least 1 for a unitary, with equality iff all `|u_ij|^2 = 1/N`.
pub fn quartic_sum(u: &UnitaryMatrix) -> f64 {
    u.matrix().iter().map(|z| z.norm_sqr().powi(2)).sum()
}

/// Haar average of `sum_i p_i^2 * sum_j q_j^2`, with `p` the outcome
/// distribution in the computational basis and `q` the one in the basis `U`.
pub fn pq_moment_closed_form(u: &UnitaryMatrix) -> f64 {
    let n = u.dim() as f64;
    let prefactor = 24.0 / (n * (n + 1.0) * (n + 2.0) * (n + 3.0));
    prefactor * (quartic_sum(u) / 6.0 + (1.0 + (n - 2.0) / 6.0) * n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mc_estimate: f64,
    pub mc_se: f64,
    pub closed_form: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of the quantity in [`pq_moment_closed_form`].
pub fn pq_moment_mc(u: &UnitaryMatrix, samples: usize, seed: u64) -> Result<MomentReport> {
    check_samples(samples)?;
    let m = stats::monte_carlo_scalar(samples, seed, |r| {
        let psi = haar_state(u.dim(), r).expect("dim >= 2");
        let p: Vec<f64> = psi.amplitudes().iter().map(|z| z.norm_sqr()).collect();
        let q: Vec<f64> = u.matrix().ad_mul(psi.amplitudes()).iter().map(|z| z.norm_sqr()).collect();
        collision(&p) * collision(&q)
    });
    Ok(MomentReport { mc_estimate: m.mean, mc_se: m.mean_se(), closed_form: pq_moment_closed_form(u), samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub mean_se: f64,
    pub variance_se: f64,
    pub samples: usize,
}

fn mean_tsallis(ms: &MeasurementSet, amps: &crate::qstate::CVector) -> f64 {
    let total: f64 =
        ms.unitaries().iter().map(|u| 1.0 - collision(&u.matrix().ad_mul(amps).iter().map(|z| z.norm_sqr()).collect::<Vec<_>>())).sum();
    total / ms.len() as f64
}

/// Monte Carlo mean and variance of `(1/L) sum_k T_2(p^(k))` over Haar states.
pub fn tsallis_variance_mc(ms: &MeasurementSet, samples: usize, seed: u64) -> Result<VarianceEstimate> {
    check_samples(samples)?;
    let m = stats::monte_carlo_scalar(samples, seed, |r| {
        let psi = haar_state(ms.dim(), r).expect("dim >= 2");
        mean_tsallis(ms, psi.amplitudes())
    });
    Ok(VarianceEstimate { mean: m.mean, variance: m.variance(), mean_se: m.mean_se(), variance_se: m.variance_se(), samples })
}

/// Exact Haar variance of the mean order-2 Tsallis entropy, from the
/// pairwise moments `<T_j T_k> = 1 - 4/(N+1) + <sum p_j^2 sum p_k^2>`.
pub fn tsallis_variance_closed_form(ms: &MeasurementSet) -> f64 {
    let n = ms.dim() as f64;
    let l = ms.len() as f64;
    let mean = (n - 1.0) / (n + 1.0);
    let us = ms.unitaries();
    let mut total = 0.0;
    for uj in us {
        for uk in us {
            let overlap = UnitaryMatrix::new_unchecked(uj.matrix().ad_mul(uk.matrix()));
            total += 1.0 - 4.0 / (n + 1.0) + pq_moment_closed_form(&overlap) - mean * mean;
        }
    }
    (total / (l * l)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{fourier, hadamard, mub_prime, qubit_triple};
    use crate::qstate::{haar_unitary, CMatrix};
    use crate::rng;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn closed_form_anchors() {
        assert!((pq_moment_closed_form(&UnitaryMatrix::identity(2)) - 7.0 / 15.0).abs() < 1e-15);
        assert!((pq_moment_closed_form(&hadamard()) - 13.0 / 30.0).abs() < 1e-15);
        assert!((pq_moment_closed_form(&fourier(3).unwrap()) - 11.0 / 45.0).abs() < 1e-15);
    }

    #[test]
    fn qubit_identity_matches_the_exact_integral() {
        // for N = 2, p ~ U[0,1]: integral of (2p^2 - 2p + 1)^2 = 7/15
        let steps = 200_000;
        let h = 1.0 / steps as f64;
        let integral: f64 = (0..steps)
            .map(|i| {
                let p = (i as f64 + 0.5) * h;
                (2.0 * p * p - 2.0 * p + 1.0).powi(2) * h
            })
            .sum();
        assert!((integral - 7.0 / 15.0).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_matches_closed_form() {
        let mut r = rng::stream(31, 0);
        for u in [UnitaryMatrix::identity(2), hadamard(), fourier(3).unwrap(), haar_unitary(3, &mut r).unwrap()] {
            let rep = pq_moment_mc(&u, 50_000, 4).unwrap();
            assert!((rep.mc_estimate - rep.closed_form).abs() < 3.0 * rep.mc_se, "{rep:?}");
        }
        assert!(pq_moment_mc(&hadamard(), 10, 0).is_err());
    }

    #[test]
    fn closed_form_depends_only_on_moduli() {
        let mut r = rng::stream(32, 0);
        let u = haar_unitary(4, &mut r).unwrap();
        let phases =
            CMatrix::from_diagonal(&crate::qstate::CVector::from_fn(4, |i, _| num_complex::Complex64::from_polar(1.0, i as f64 * 0.7)));
        let mut perm = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 2), (1, 0), (2, 3), (3, 1)] {
            perm[(i, j)] = crate::qstate::ONE;
        }
        let v = UnitaryMatrix::new(&phases * u.matrix() * &perm).unwrap();
        assert!((pq_moment_closed_form(&u) - pq_moment_closed_form(&v)).abs() < 1e-14);
    }

    #[test]
    fn quartic_sum_is_minimal_exactly_for_unbiased_matrices() {
        let mut r = rng::stream(33, 0);
        for _ in 0..200 {
            assert!(quartic_sum(&haar_unitary(3, &mut r).unwrap()) > 1.0 + 1e-6);
        }
        assert!((quartic_sum(&fourier(5).unwrap()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_qubit_basis_variance() {
        let ms = MeasurementSet::new(vec![UnitaryMatrix::identity(2)]).unwrap();
        assert!((tsallis_variance_closed_form(&ms) - 1.0 / 45.0).abs() < 1e-15);
        let est = tsallis_variance_mc(&ms, 100_000, 5).unwrap();
        assert!((est.variance - 1.0 / 45.0).abs() < 3.0 * est.variance_se, "{est:?}");
        assert!((est.mean - 1.0 / 3.0).abs() < 3.0 * est.mean_se);
    }

    #[test]
    fn duplicated_basis_keeps_single_basis_variance() {
        let single = MeasurementSet::new(vec![UnitaryMatrix::identity(2)]).unwrap();
        let dup = MeasurementSet::with_identity(vec![UnitaryMatrix::identity(2)]).unwrap();
        assert!((tsallis_variance_closed_form(&single) - tsallis_variance_closed_form(&dup)).abs() < 1e-15);
        let a = tsallis_variance_mc(&single, 10_000, 6).unwrap();
        let b = tsallis_variance_mc(&dup, 10_000, 6).unwrap();
        assert!((a.variance - b.variance).abs() < 1e-12);
    }

    #[test]
    fn complete_mub_sets_have_constant_mean_tsallis() {
        for p in [2, 3, 5] {
            assert!(tsallis_variance_closed_form(&mub_prime(p).unwrap()) < 1e-14);
        }
        let est = tsallis_variance_mc(&qubit_triple(FRAC_PI_4), 1000, 1).unwrap();
        assert!(est.variance < 1e-25);
    }

    #[test]
    fn closed_form_variance_matches_monte_carlo() {
        let mut r = rng::stream(34, 0);
        for (n, l) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            let rest = (1..l).map(|_| haar_unitary(n, &mut r).unwrap()).collect();
            let ms = MeasurementSet::with_identity(rest).unwrap();
            let est = tsallis_variance_mc(&ms, 50_000, 7).unwrap();
            let exact = tsallis_variance_closed_form(&ms);
            assert!((est.variance - exact).abs() < 3.0 * est.variance_se, "({n}, {l}): {est:?} vs {exact}");
        }
    }
}
