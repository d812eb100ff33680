//! Bipartite entanglement: entanglement entropy, averages over splittings,
//! entangling-gate and mutually-entangled-basis checks, and the canonical
//! two-qubit decomposition with explicit mutually separable and mutually
//! entangled states.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, LN_2, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{multistart, Direction, EntropyRms, OptimizationResult, OptimizerConfig, SphereObjective};
use crate::qstate::{c, check_dim, haar_state, max_abs, CMatrix, CVector, PureState, UnitaryMatrix, I, ONE, ZERO};
use crate::stats;

/// Reconstruction tolerance for the canonical decomposition and its witnesses.
pub const CANONICAL_TOL: f64 = 1e-8;

fn reshape(amps: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |a, b| amps[a * n + b])
}

fn local_dim_of(total: usize) -> Result<usize> {
    let n = (total as f64).sqrt().round() as usize;
    if n * n != total || n < 2 {
        return Err(Error::ShapeMismatch { expected: n.max(2) * n.max(2), got: total });
    }
    Ok(n)
}

fn entropy_of_amplitudes(amps: &CVector, n: usize) -> f64 {
    let sv = reshape(amps, n).singular_values();
    sv.iter().map(|s| s * s).filter(|&l| l > 1e-300).map(|l| -l * l.ln()).sum::<f64>().max(0.0)
}

/// Von Neumann entropy of either reduced state of a bipartite pure state on
/// `C^n (x) C^n`, with `|a, b>` at index `a n + b`.
pub fn entanglement_entropy(state: &PureState, local_dim: usize) -> Result<f64> {
    check_dim(local_dim * local_dim, state.dim())?;
    Ok(entropy_of_amplitudes(state.amplitudes(), local_dim))
}

/// Ordered bipartite gates `{W_1 = I, ..., W_L}` on `C^N (x) C^N`; the
/// columns of `W_j` form the `j`-th product-splitting basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingSet {
    local_dim: usize,
    gates: Vec<UnitaryMatrix>,
}

impl SplittingSet {
    pub fn new(gates: Vec<UnitaryMatrix>) -> Result<Self> {
        let first = gates.first().ok_or_else(|| Error::Precondition("empty splitting set".into()))?;
        let local_dim = local_dim_of(first.dim())?;
        for g in &gates {
            check_dim(first.dim(), g.dim())?;
        }
        if first.distance_to_identity() > 1e-12 {
            return Err(Error::Precondition("first gate must be the identity".into()));
        }
        Ok(Self { local_dim, gates })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn gates(&self) -> &[UnitaryMatrix] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

/// `(1/L) sum_j E(W_j^dagger psi)`: mean entanglement of the state's
/// coordinates in each splitting basis.
pub fn average_entanglement(state: &PureState, ss: &SplittingSet) -> Result<f64> {
    check_dim(ss.gates[0].dim(), state.dim())?;
    let n = ss.local_dim;
    let total: f64 = ss.gates.iter().map(|w| entropy_of_amplitudes(&w.matrix().ad_mul(state.amplitudes()), n)).sum();
    Ok(total / ss.len() as f64)
}

fn min_column_entropy(w: &CMatrix, n: usize) -> f64 {
    w.column_iter().map(|col| entropy_of_amplitudes(&col.into_owned(), n)).fold(f64::INFINITY, f64::min)
}

/// Whether every column of `w` is maximally entangled within `tol`.
pub fn is_entangling_gate(w: &UnitaryMatrix, local_dim: usize, tol: f64) -> Result<bool> {
    check_dim(local_dim * local_dim, w.dim())?;
    Ok(min_column_entropy(w.matrix(), local_dim) >= (local_dim as f64).ln() - tol)
}

/// Verification detail for one ordered pair of gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    /// Smallest column entanglement of `W_i^dagger W_j`.
    pub min_entropy: f64,
    pub pass: bool,
}

/// Checks every ordered pair `i != j` of `ws`.
pub fn mutual_entanglement_report(ws: &[UnitaryMatrix], local_dim: usize, tol: f64) -> Result<Vec<PairCheck>> {
    if ws.len() < 2 {
        return Err(Error::Precondition("need at least two gates".into()));
    }
    for w in ws {
        check_dim(local_dim * local_dim, w.dim())?;
    }
    let target = (local_dim as f64).ln() - tol;
    let mut out = Vec::new();
    for (i, wi) in ws.iter().enumerate() {
        for (j, wj) in ws.iter().enumerate() {
            if i != j {
                let min_entropy = min_column_entropy(&wi.matrix().ad_mul(wj.matrix()), local_dim);
                out.push(PairCheck { i, j, min_entropy, pass: min_entropy >= target });
            }
        }
    }
    Ok(out)
}

/// Whether `ws` are mutually entangled bases: `W_i^dagger W_j` is an
/// entangling gate for all `i != j`.
pub fn is_mutually_entangled_set(ws: &[UnitaryMatrix], local_dim: usize, tol: f64) -> Result<bool> {
    Ok(mutual_entanglement_report(ws, local_dim, tol)?.iter().all(|p| p.pass))
}

/// Average entanglement over a splitting set, as a sphere objective.
pub struct EntanglementObjective {
    local_dim: usize,
    gates: Vec<CMatrix>,
}

impl EntanglementObjective {
    pub fn new(ss: &SplittingSet) -> Self {
        Self { local_dim: ss.local_dim, gates: ss.gates.iter().map(|g| g.matrix().clone()).collect() }
    }
}

impl SphereObjective for EntanglementObjective {
    fn dim(&self) -> usize {
        self.local_dim * self.local_dim
    }

    fn value_grad(&self, psi: &CVector, grad: &mut CVector) -> f64 {
        let n = self.local_dim;
        let l = self.gates.len() as f64;
        grad.fill(ZERO);
        let mut e = 0.0;
        for w in &self.gates {
            let phi = w.ad_mul(psi);
            let svd = reshape(&phi, n).svd(true, true);
            let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
            // dE/dM* = -U diag((ln s^2 + 1) s) V^dagger
            let mut d = CMatrix::zeros(n, n);
            for (k, &s) in svd.singular_values.iter().enumerate() {
                let lam = s * s;
                if lam > 1e-300 {
                    e -= lam * lam.ln();
                    let h = -(lam.ln() + 1.0) * s;
                    d += u.column(k) * vt.row(k) * c(h, 0.0);
                }
            }
            let dv = CVector::from_fn(n * n, |i, _| d[(i / n, i % n)]);
            grad.gemv(c(2.0 / l, 0.0), w, &dv, ONE);
        }
        e / l
    }
}

/// Smallest or largest average entanglement over pure states of `C^N (x) C^N`.
pub fn extremize_average_entanglement(ss: &SplittingSet, dir: Direction, cfg: &OptimizerConfig, seed: u64) -> Result<OptimizationResult> {
    let obj = EntanglementObjective::new(ss);
    let mut res = multistart(&obj, dir, cfg, seed)?;
    res.value = average_entanglement(&res.state, ss)?.clamp(0.0, (ss.local_dim as f64).ln());
    Ok(res)
}

/// Monte Carlo mean and fluctuation of the average entanglement over Haar states.
pub fn entanglement_rms(ss: &SplittingSet, samples: usize, seed: u64) -> Result<EntropyRms> {
    if samples < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    let d = ss.local_dim * ss.local_dim;
    let m = stats::monte_carlo_scalar(samples, seed, |r| {
        let psi = haar_state(d, r).expect("dim >= 4");
        average_entanglement(&psi, ss).expect("matching dims")
    });
    let rms = m.population_variance().sqrt();
    let rms_se = if rms > 0.0 { m.variance_se() / (2.0 * rms) } else { 0.0 };
    Ok(EntropyRms { mean: m.mean, rms, se: m.mean_se(), rms_se })
}

// ---------------------------------------------------------------------------
// Two-qubit canonical form

fn pauli(k: usize) -> CMatrix {
    match k {
        0 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        _ => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// Magic basis: local gates become real orthogonal and `XX, YY, ZZ` diagonal.
fn magic() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    let (o, z, i) = (c(s, 0.0), ZERO, c(0.0, s));
    CMatrix::from_row_slice(4, 4, &[o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i])
}

/// `exp(i (a XX + b YY + c ZZ))`.
fn w_abc(a: f64, b: f64, cc: f64) -> CMatrix {
    w_can_matrix(a - b, a + b, cc)
}

fn w_can_matrix(b1: f64, b2: f64, b3: f64) -> CMatrix {
    let p = Complex64::from_polar(1.0, b3);
    let m = p.conj();
    let (s1, c1) = b1.sin_cos();
    let (s2, c2) = b2.sin_cos();
    let mut w = CMatrix::zeros(4, 4);
    w[(0, 0)] = p * c1;
    w[(0, 3)] = p * I * s1;
    w[(3, 0)] = p * I * s1;
    w[(3, 3)] = p * c1;
    w[(1, 1)] = m * c2;
    w[(1, 2)] = m * I * s2;
    w[(2, 1)] = m * I * s2;
    w[(2, 2)] = m * c2;
    w
}

/// Canonical two-qubit gate with parameters `(b1, b2, b3)`; equal to
/// `exp(i (a XX + b YY + c ZZ))` with `a = (b1+b2)/2`, `b = (b2-b1)/2`, `c = b3`.
pub fn w_can(b1: f64, b2: f64, b3: f64) -> UnitaryMatrix {
    UnitaryMatrix::new_unchecked(w_can_matrix(b1, b2, b3))
}

/// `W = e^{i phase} (A (x) B) W_can(b1, b2, b3) (C (x) D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalTwoQubit {
    pub a: UnitaryMatrix,
    pub b: UnitaryMatrix,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub c: UnitaryMatrix,
    pub d: UnitaryMatrix,
    pub phase: f64,
    /// Max-norm reconstruction error against the input gate.
    pub residual: f64,
}

impl CanonicalTwoQubit {
    pub fn reconstruct(&self) -> CMatrix {
        let left = self.a.matrix().kronecker(self.b.matrix());
        let right = self.c.matrix().kronecker(self.d.matrix());
        left * w_can_matrix(self.b1, self.b2, self.b3) * right * Complex64::from_polar(1.0, self.phase)
    }

    /// Interaction coefficients `(a, b, c)` of `exp(i (a XX + b YY + c ZZ))`.
    pub fn interaction(&self) -> (f64, f64, f64) {
        ((self.b1 + self.b2) / 2.0, (self.b2 - self.b1) / 2.0, self.b3)
    }
}

/// Real orthogonal `Q` (det +1) diagonalizing the symmetric unitary `m`.
fn orthogonal_diagonalizer(m: &CMatrix) -> Option<(DMatrix<f64>, Vec<Complex64>)> {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    for t in [1.618_033_988_749_895, 0.577_215_664_901_532_9, 2.414_213_562_373_095, 0.381_966_011_250_105_1, 4.669_201_609_102_99] {
        let eig = SymmetricEigen::new(&re + &im * t);
        let mut q = eig.eigenvectors;
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        let qc = q.map(|x| c(x, 0.0));
        let diag = qc.transpose() * m * &qc;
        let off = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|ij| diag[ij].norm()).fold(0.0, f64::max);
        if off < 1e-10 {
            return Some((q, (0..4).map(|k| diag[(k, k)]).collect()));
        }
    }
    None
}

/// Splits a `4 x 4` matrix of the form `A (x) B` into its factors.
fn factor_kron(k: &CMatrix) -> (CMatrix, CMatrix) {
    let block = |i: usize, j: usize| k.view((2 * i, 2 * j), (2, 2)).into_owned();
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..2 {
        for j in 0..2 {
            let nrm = block(i, j).norm();
            if nrm > best {
                (bi, bj, best) = (i, j, nrm);
            }
        }
    }
    let blk = block(bi, bj);
    let det = blk.determinant();
    let bm = &blk / det.sqrt();
    let a = CMatrix::from_fn(2, 2, |i, j| (bm.ad_mul(&block(i, j))).trace() / c(2.0, 0.0));
    (a, bm)
}

struct Frame {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
    h: [f64; 3],
    phase: f64,
}

impl Frame {
    /// `E(h) = i s (P_k (x) P_k) E(h - s pi/2 e_k)`.
    fn shift(&mut self, k: usize, s: f64) {
        let p = pauli(k);
        self.a = &self.a * &p;
        self.b = &self.b * &p;
        self.phase += s * FRAC_PI_2;
        self.h[k] -= s * FRAC_PI_2;
    }

    /// `E(h) = (R (x) R) E(h with k, l swapped) (R^dagger (x) R^dagger)`.
    fn swap(&mut self, k: usize, l: usize) {
        let s = FRAC_1_SQRT_2;
        let r = match (k.min(l), k.max(l)) {
            (0, 1) => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I]),
            (1, 2) => CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, -s), c(0.0, -s), c(s, 0.0)]),
            _ => CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(-s, 0.0), c(s, 0.0), c(s, 0.0)]),
        };
        self.a = &self.a * &r;
        self.b = &self.b * &r;
        self.c = r.adjoint() * &self.c;
        self.d = r.adjoint() * &self.d;
        self.h.swap(k, l);
    }

    /// `E(h) = (P_m (x) I) E(h with k, l negated) (P_m (x) I)`, `m` the third index.
    fn flip(&mut self, k: usize, l: usize) {
        let p = pauli(3 - k - l);
        self.a = &self.a * &p;
        self.c = &p * &self.c;
        self.h[k] = -self.h[k];
        self.h[l] = -self.h[l];
    }

    /// Moves `h` into the chamber `pi/4 >= h0 >= h2 >= |h1|`.
    fn reduce(&mut self) {
        const EPS: f64 = 1e-12;
        for k in 0..3 {
            while self.h[k] > FRAC_PI_4 + EPS {
                self.shift(k, 1.0);
            }
            while self.h[k] <= -FRAC_PI_4 + EPS {
                self.shift(k, -1.0);
            }
        }
        // order |h0| >= |h2| >= |h1|
        let order = [0, 2, 1];
        for _ in 0..3 {
            for w in 0..2 {
                let (k, l) = (order[w], order[w + 1]);
                if self.h[l].abs() > self.h[k].abs() + EPS {
                    self.swap(k, l);
                }
            }
        }
        match (self.h[0] < 0.0, self.h[2] < 0.0) {
            (true, true) => self.flip(0, 2),
            (true, false) => self.flip(0, 1),
            (false, true) => self.flip(2, 1),
            (false, false) => {}
        }
        if (self.h[0] - FRAC_PI_4).abs() <= EPS && self.h[1] < -EPS {
            self.shift(0, 1.0);
            self.flip(0, 1);
        }
    }
}

/// Decomposes a two-qubit unitary into local gates and a canonical core with
/// `(a, b, c) = ((b1+b2)/2, (b2-b1)/2, b3)` in the chamber
/// `pi/4 >= a >= c >= |b|`.
pub fn canonical_two_qubit(w: &UnitaryMatrix) -> Result<CanonicalTwoQubit> {
    check_dim(4, w.dim())?;
    let u = w.matrix();
    let det = u.determinant();
    let phase0 = det.arg() / 4.0;
    let us = u * Complex64::from_polar(1.0, -phase0);
    let bm = magic();
    let um = bm.ad_mul(&us) * &bm;
    let m2 = um.transpose() * &um;
    let (q, lambda) = orthogonal_diagonalizer(&m2).ok_or(Error::DecompositionFailed { residual: f64::INFINITY })?;

    // half eigenphases with sum zero, so that det D = 1
    let mut theta: Vec<f64> = lambda.iter().map(|l| l.arg()).collect();
    let turns = (theta.iter().sum::<f64>() / TAU).round() as i64;
    for _ in 0..turns.abs() {
        let idx = if turns > 0 {
            (0..4).max_by(|&i, &j| theta[i].total_cmp(&theta[j])).expect("four")
        } else {
            (0..4).min_by(|&i, &j| theta[i].total_cmp(&theta[j])).expect("four")
        };
        theta[idx] -= TAU * turns.signum() as f64;
    }
    let qc = q.map(|x| c(x, 0.0));
    let dinv = CMatrix::from_diagonal(&CVector::from_iterator(4, theta.iter().map(|t| Complex64::from_polar(1.0, -t / 2.0))));
    let o1 = &um * &qc * dinv;
    let k1 = &bm * o1 * bm.adjoint();
    let k2 = &bm * qc.transpose() * bm.adjoint();

    // theta_k / 2 = a x_k + b y_k + c z_k with (x, y, z) the magic-basis spectra of XX, YY, ZZ
    let spectra: Vec<Vec<f64>> = (0..3)
        .map(|k| {
            let pp = pauli(k).kronecker(&pauli(k));
            let dm = bm.ad_mul(&pp) * &bm;
            (0..4).map(|i| dm[(i, i)].re).collect()
        })
        .collect();
    let mut h = [0.0; 3];
    for (hk, sp) in h.iter_mut().zip(&spectra) {
        *hk = sp.iter().zip(&theta).map(|(s, t)| s * t / 2.0).sum::<f64>() / 4.0;
    }

    let (a, b) = factor_kron(&k1);
    let (cm, dm) = factor_kron(&k2);
    let mut f = Frame { a, b, c: cm, d: dm, h, phase: phase0 };
    f.reduce();

    let [ha, hb, hc] = f.h;
    let mut out = CanonicalTwoQubit {
        a: UnitaryMatrix::new_unchecked(f.a),
        b: UnitaryMatrix::new_unchecked(f.b),
        b1: ha - hb,
        b2: ha + hb,
        b3: hc,
        c: UnitaryMatrix::new_unchecked(f.c),
        d: UnitaryMatrix::new_unchecked(f.d),
        phase: f.phase.rem_euclid(TAU),
        residual: 0.0,
    };
    out.residual = max_abs(&(out.reconstruct() - u));
    if !(out.residual <= CANONICAL_TOL) {
        return Err(Error::DecompositionFailed { residual: out.residual });
    }
    debug_assert!(max_abs(&(w_abc(ha, hb, hc) - w_can_matrix(out.b1, out.b2, out.b3))) < 1e-14);
    Ok(out)
}

/// A two-qubit state with its entanglement in the two bases `{I, W}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub state: PureState,
    /// `E(x)`.
    pub entropy: f64,
    /// `E(W x)`.
    pub image_entropy: f64,
    /// Whether the closed-form construction was used (otherwise a numerical search).
    pub analytic: bool,
}

fn witness(state: PureState, w: &UnitaryMatrix, analytic: bool) -> Witness {
    let entropy = entropy_of_amplitudes(state.amplitudes(), 2);
    let image_entropy = entropy_of_amplitudes(&(w.matrix() * state.amplitudes()), 2);
    Witness { state, entropy, image_entropy, analytic }
}

fn pull_back(dec: &CanonicalTwoQubit, xc: CVector) -> Result<PureState> {
    let right = dec.c.matrix().kronecker(dec.d.matrix());
    PureState::normalized(right.ad_mul(&xc))
}

fn fallback_config() -> OptimizerConfig {
    OptimizerConfig::for_dim(4)
}

/// Sum over `{x, W x}` of `1 - s_max^2`, zero exactly on states that are
/// product in both bases.
struct ProductDefect {
    gates: Vec<CMatrix>,
}

impl SphereObjective for ProductDefect {
    fn dim(&self) -> usize {
        4
    }

    fn value_grad(&self, psi: &CVector, grad: &mut CVector) -> f64 {
        grad.fill(ZERO);
        let mut f = 0.0;
        for g in &self.gates {
            let phi = g.ad_mul(psi);
            let m = reshape(&phi, 2);
            let svd = m.clone().svd(false, true);
            let vt = svd.v_t.expect("requested");
            let k = svd.singular_values.imax();
            let s = svd.singular_values[k];
            f += 1.0 - s * s;
            // d(s^2)/dM* = M v v^dagger
            let v = vt.row(k).adjoint();
            let dm = &m * &v * v.adjoint() * c(-1.0, 0.0);
            let dv = CVector::from_fn(4, |i, _| dm[(i / 2, i % 2)]);
            grad.gemv(c(2.0, 0.0), g, &dv, ONE);
        }
        f
    }
}

/// State that is a product state both as `x` and as `W x`.
pub fn mutually_separable_state(w: &UnitaryMatrix) -> Result<Witness> {
    check_dim(4, w.dim())?;
    if let Ok(dec) = canonical_two_qubit(w) {
        let (s1, c1) = dec.b1.sin_cos();
        let (s2, c2) = dec.b2.sin_cos();
        let xc = if (s2 * c2).abs() < 1e-12 {
            CVector::from_vec(vec![ZERO, ONE, ZERO, ZERO])
        } else {
            let beta = (Complex64::from_polar(1.0, 4.0 * dec.b3) * (s1 * c1 / (s2 * c2))).sqrt();
            CVector::from_vec(vec![ONE, beta, ZERO, ZERO])
        };
        let wit = witness(pull_back(&dec, xc)?, w, true);
        if wit.entropy <= CANONICAL_TOL && wit.image_entropy <= CANONICAL_TOL {
            return Ok(wit);
        }
    }
    let obj = ProductDefect { gates: vec![CMatrix::identity(4, 4), w.adjoint().into_inner()] };
    let res = multistart(&obj, Direction::Min, &fallback_config(), 0)?;
    let wit = witness(res.state, w, false);
    if wit.entropy <= CANONICAL_TOL && wit.image_entropy <= CANONICAL_TOL {
        Ok(wit)
    } else {
        Err(Error::NotFound(format!("no mutually separable state (entropies {:.3e}, {:.3e})", wit.entropy, wit.image_entropy)))
    }
}

/// State that is maximally entangled both as `y` and as `W y`.
pub fn mutually_entangled_state(w: &UnitaryMatrix) -> Result<Witness> {
    check_dim(4, w.dim())?;
    let target = LN_2 - CANONICAL_TOL;
    if let Ok(dec) = canonical_two_qubit(w) {
        let s = c(FRAC_1_SQRT_2, 0.0);
        let bell = CVector::from_vec(vec![s, ZERO, ZERO, s]);
        let wit = witness(pull_back(&dec, bell)?, w, true);
        if wit.entropy >= target && wit.image_entropy >= target {
            return Ok(wit);
        }
    }
    let ss = SplittingSet::new(vec![UnitaryMatrix::identity(4), w.adjoint()])?;
    let res = extremize_average_entanglement(&ss, Direction::Max, &fallback_config(), 0)?;
    let wit = witness(res.state, w, false);
    if wit.entropy >= target && wit.image_entropy >= target {
        Ok(wit)
    } else {
        Err(Error::NotFound(format!("no mutually entangled state (entropies {:.6}, {:.6})", wit.entropy, wit.image_entropy)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{cyclic_latin_square, meb_family_alpha, meb_fixture, meb_from_mubs, mub_prime};
    use crate::qstate::haar_unitary;
    use crate::rng;

    fn swap() -> UnitaryMatrix {
        let mut m = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            m[(i, j)] = ONE;
        }
        UnitaryMatrix::new(m).unwrap()
    }

    fn bell() -> PureState {
        PureState::from_slice(&[ONE, ZERO, ZERO, ONE]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entanglement_entropy(&PureState::basis(4, 0).unwrap(), 2).unwrap(), 0.0);
        assert!((entanglement_entropy(&bell(), 2).unwrap() - LN_2).abs() < 1e-15);
        let s = PureState::from_slice(&[c(0.9f64.sqrt(), 0.0), ZERO, ZERO, c(0.1f64.sqrt(), 0.0)]).unwrap();
        let expected = -0.9 * 0.9f64.ln() - 0.1 * 0.1f64.ln();
        assert!((entanglement_entropy(&s, 2).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.3251).abs() < 1e-4);
        assert!(entanglement_entropy(&PureState::basis(3, 0).unwrap(), 2).is_err());
    }

    #[test]
    fn entropy_is_local_unitary_invariant() {
        let mut r = rng::stream(3, 0);
        for _ in 0..20 {
            let a = haar_unitary(3, &mut r).unwrap();
            let b = haar_unitary(3, &mut r).unwrap();
            let psi = haar_state(9, &mut r).unwrap();
            let moved = psi.evolve(&a.kron(&b)).unwrap();
            let d = entanglement_entropy(&psi, 3).unwrap() - entanglement_entropy(&moved, 3).unwrap();
            assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn average_entanglement_examples() {
        let id = SplittingSet::new(vec![UnitaryMatrix::identity(4)]).unwrap();
        assert!((average_entanglement(&bell(), &id).unwrap() - LN_2).abs() < 1e-15);
        let sw = SplittingSet::new(vec![UnitaryMatrix::identity(4), swap()]).unwrap();
        assert!(average_entanglement(&PureState::basis(4, 0).unwrap(), &sw).unwrap().abs() < 1e-15);
        let fam = SplittingSet::new(meb_family_alpha(FRAC_PI_4)).unwrap();
        let v = average_entanglement(&bell(), &fam).unwrap();
        assert!((0.0..=LN_2).contains(&v));
    }

    #[test]
    fn gate_checks() {
        let f = meb_fixture(2).unwrap();
        assert!(is_entangling_gate(&f[1], 2, 1e-10).unwrap());
        assert!(!is_entangling_gate(&UnitaryMatrix::identity(4), 2, 1e-10).unwrap());
        assert!(!is_entangling_gate(&swap(), 2, 1e-10).unwrap());
        assert!(is_entangling_gate(&swap(), 3, 1e-10).is_err());
    }

    #[test]
    fn meb_sets() {
        assert!(is_mutually_entangled_set(&meb_fixture(2).unwrap(), 2, 1e-10).unwrap());
        assert!(is_mutually_entangled_set(&meb_fixture(3).unwrap(), 3, 1e-10).unwrap());
        assert!(!is_mutually_entangled_set(&[UnitaryMatrix::identity(4), UnitaryMatrix::identity(4)], 2, 1e-10).unwrap());
        assert!(is_mutually_entangled_set(&meb_family_alpha(FRAC_PI_4), 2, 1e-10).unwrap());
        for n in [2, 3, 5] {
            let ws = meb_from_mubs(&cyclic_latin_square(n).unwrap(), mub_prime(n).unwrap().unitaries()).unwrap();
            assert_eq!(ws.len(), n + 1);
            assert!(is_mutually_entangled_set(&ws, n, 1e-10).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn entanglement_gradient_matches_finite_differences() {
        let mut r = rng::stream(8, 0);
        let ss = SplittingSet::new(vec![UnitaryMatrix::identity(9), haar_unitary(9, &mut r).unwrap()]).unwrap();
        let obj = EntanglementObjective::new(&ss);
        let psi = haar_state(9, &mut r).unwrap().into_inner();
        let mut g = CVector::zeros(9);
        let mut scratch = CVector::zeros(9);
        obj.value_grad(&psi, &mut g);
        let h = 1e-6;
        for i in 0..9 {
            for (dir, comp) in [(ONE, g[i].re), (I, g[i].im)] {
                let mut p = psi.clone();
                p[i] += dir * h;
                let mut m = psi.clone();
                m[i] -= dir * h;
                let fd = (obj.value_grad(&p, &mut scratch) - obj.value_grad(&m, &mut scratch)) / (2.0 * h);
                assert!((fd - comp).abs() < 1e-6, "{fd} vs {comp}");
            }
        }
    }

    #[test]
    fn w_can_equals_exponential_form() {
        // exp(i(a XX + b YY + c ZZ)) from commuting factors cos + i sin P(x)P
        let (a, b, cc) = (0.37, -0.11, 0.2);
        let mut e = CMatrix::identity(4, 4);
        for (k, t) in [(0, a), (1, b), (2, cc)] {
            let pp = pauli(k).kronecker(&pauli(k));
            e *= CMatrix::identity(4, 4) * c(f64::cos(t), 0.0) + pp * c(0.0, f64::sin(t));
        }
        assert!(max_abs(&(e - w_abc(a, b, cc))) < 1e-15);
    }

    #[test]
    fn magic_basis_diagonalizes_pauli_products() {
        let bm = magic();
        assert!(max_abs(&(bm.adjoint() * &bm - CMatrix::identity(4, 4))) < 1e-15);
        for k in 0..3 {
            let d = bm.ad_mul(&pauli(k).kronecker(&pauli(k))) * &bm;
            assert!(max_abs(&(&d - CMatrix::from_diagonal(&d.diagonal()))) < 1e-15);
        }
    }

    #[test]
    fn frame_moves_preserve_the_gate() {
        let id = CMatrix::identity(2, 2);
        let mut f = Frame { a: id.clone(), b: id.clone(), c: id.clone(), d: id, h: [1.3, -0.4, 0.9], phase: 0.0 };
        let target = w_abc(1.3, -0.4, 0.9);
        let check = |f: &Frame| {
            let m = f.a.kronecker(&f.b) * w_abc(f.h[0], f.h[1], f.h[2]) * f.c.kronecker(&f.d) * Complex64::from_polar(1.0, f.phase);
            max_abs(&(m - &target))
        };
        f.shift(0, 1.0);
        assert!(check(&f) < 1e-14);
        f.swap(0, 2);
        assert!(check(&f) < 1e-14);
        f.swap(1, 2);
        assert!(check(&f) < 1e-14);
        f.swap(0, 1);
        assert!(check(&f) < 1e-14);
        f.flip(0, 1);
        assert!(check(&f) < 1e-14);
        f.flip(1, 2);
        assert!(check(&f) < 1e-14);
        f.reduce();
        assert!(check(&f) < 1e-13);
        let [a, b, cc] = f.h;
        assert!(FRAC_PI_4 + 1e-12 >= a && a + 1e-12 >= cc && cc + 1e-12 >= b.abs());
    }

    #[test]
    fn canonical_identity() {
        let d = canonical_two_qubit(&UnitaryMatrix::identity(4)).unwrap();
        assert!(d.b1.abs() < 1e-12 && d.b2.abs() < 1e-12 && d.b3.abs() < 1e-12);
        assert!(d.residual < 1e-12);
    }

    #[test]
    fn canonical_round_trip_on_synthesized_gate() {
        let d = canonical_two_qubit(&w_can(0.3, 0.2, 0.1)).unwrap();
        assert!((d.b1 - 0.3).abs() < 1e-10 && (d.b2 - 0.2).abs() < 1e-10 && (d.b3 - 0.1).abs() < 1e-10, "{d:?}");
        assert!(d.residual <= 1e-8);
        // dressed with random locals and phase
        let mut r = rng::stream(21, 0);
        let l = haar_unitary(2, &mut r).unwrap().kron(&haar_unitary(2, &mut r).unwrap());
        let rr = haar_unitary(2, &mut r).unwrap().kron(&haar_unitary(2, &mut r).unwrap());
        let w = UnitaryMatrix::new(l.matrix() * w_can(0.3, 0.2, 0.1).matrix() * rr.matrix() * Complex64::from_polar(1.0, 0.7)).unwrap();
        let d = canonical_two_qubit(&w).unwrap();
        assert!((d.b1 - 0.3).abs() < 1e-8 && (d.b2 - 0.2).abs() < 1e-8 && (d.b3 - 0.1).abs() < 1e-8, "{d:?}");
    }

    #[test]
    fn canonical_round_trip_on_haar_gates() {
        let mut r = rng::stream(22, 0);
        for _ in 0..200 {
            let w = haar_unitary(4, &mut r).unwrap();
            let d = canonical_two_qubit(&w).unwrap();
            assert!(d.residual <= 1e-8);
            let (a, b, cc) = d.interaction();
            assert!(FRAC_PI_4 + 1e-9 >= a && a + 1e-9 >= cc && cc + 1e-9 >= b.abs());
        }
    }

    #[test]
    fn canonical_handles_special_gates() {
        let mut cnot = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            cnot[(i, j)] = ONE;
        }
        for g in [swap(), UnitaryMatrix::new(cnot).unwrap(), meb_fixture(2).unwrap()[2].clone(), w_can(FRAC_PI_2, 0.0, 0.0)] {
            let d = canonical_two_qubit(&g).unwrap();
            assert!(d.residual <= 1e-8, "{d:?}");
        }
    }

    #[test]
    fn witnesses_for_simple_gates() {
        let x = mutually_separable_state(&UnitaryMatrix::identity(4)).unwrap();
        assert!(x.analytic && x.entropy <= 1e-12);
        let y = mutually_entangled_state(&UnitaryMatrix::identity(4)).unwrap();
        assert!(y.state.fidelity(&bell()) > 1.0 - 1e-12);
        let x = mutually_separable_state(&w_can(0.4, 0.0, 0.1)).unwrap();
        assert!(x.entropy <= 1e-12 && x.image_entropy <= 1e-12);
        let w = w_can(0.3, 0.2, 0.1);
        let y = mutually_entangled_state(&w).unwrap();
        assert!((y.entropy - LN_2).abs() < 1e-8 && (y.image_entropy - LN_2).abs() < 1e-8);
    }

    #[test]
    fn witnesses_for_haar_gates() {
        let mut r = rng::stream(23, 0);
        for _ in 0..50 {
            let w = haar_unitary(4, &mut r).unwrap();
            let x = mutually_separable_state(&w).unwrap();
            assert!(x.entropy <= 1e-8 && x.image_entropy <= 1e-8);
            let y = mutually_entangled_state(&w).unwrap();
            assert!((y.entropy - LN_2).abs() <= 1e-8 && (y.image_entropy - LN_2).abs() <= 1e-8);
            assert!(x.analytic && y.analytic);
        }
    }

    #[test]
    fn haar_pair_entanglement_extremes() {
        let mut r = rng::stream(24, 0);
        let w = haar_unitary(4, &mut r).unwrap();
        let ss = SplittingSet::new(vec![UnitaryMatrix::identity(4), w]).unwrap();
        let cfg = OptimizerConfig::for_dim(4);
        let max = extremize_average_entanglement(&ss, Direction::Max, &cfg, 1).unwrap();
        assert!((max.value - LN_2).abs() < 1e-6, "{}", max.value);
        let min = extremize_average_entanglement(&ss, Direction::Min, &cfg, 1).unwrap();
        assert!(min.value < 1e-6, "{}", min.value);
    }

    #[test]
    fn bell_pairs_have_no_entanglement_fluctuation() {
        let id = SplittingSet::new(vec![UnitaryMatrix::identity(4)]).unwrap();
        let r = entanglement_rms(&id, 20_000, 2).unwrap();
        // mean entanglement of a Haar state on C^2 (x) C^2 is 1/3
        assert!((r.mean - 1.0 / 3.0).abs() < 3.0 * r.se, "{r:?}");
    }

    #[test]
    fn meb_family_maximum_at_quarter_pi() {
        let ss = SplittingSet::new(meb_family_alpha(FRAC_PI_4)).unwrap();
        let max = extremize_average_entanglement(&ss, Direction::Max, &OptimizerConfig::for_dim(4), 1).unwrap();
        assert!((max.value - 0.5158).abs() < 1e-3, "{}", max.value);
    }
}
