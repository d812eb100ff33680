//! Pure states, unitary matrices, SU(N) generators, Bloch vectors and Haar sampling.
//!
//! Convention: the columns of a [`UnitaryMatrix`] are the vectors of the
//! measurement basis it describes, so outcome `i` has probability
//! `|<u_i|psi>|^2 = |(U^dagger psi)_i|^2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::entropy::ProbabilityVector;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Normalization tolerance for pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Default unitarity tolerance (max-norm of `U^dagger U - I`).
pub const UNITARY_TOL: f64 = 1e-10;

#[allow(dead_code)]
pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Max-norm of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-norm of `U^dagger U - I`.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let g = m.adjoint() * m;
    max_abs(&(g - CMatrix::identity(m.nrows(), m.nrows())))
}

/// Unit-norm vector of a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
}

impl PureState {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amps: CVector) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidDimension(amps.len()));
        }
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr: n2 });
        }
        Ok(Self { amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amps: CVector) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidDimension(amps.len()));
        }
        let n = amps.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        Ok(Self { amps: amps / Complex64::from(n) })
    }

    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        Self::normalized(CVector::from_column_slice(amps))
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if index >= dim {
            return Err(Error::ShapeMismatch { expected: dim, got: index + 1 });
        }
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Ok(Self { amps: v })
    }

    /// `(1, e^{i phi_2}, ..., e^{i phi_N}) / sqrt(N)` with `phases = (phi_2, ..., phi_N)`.
    pub fn coherent(phases: &[f64]) -> Result<Self> {
        let n = phases.len() + 1;
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let s = 1.0 / (n as f64).sqrt();
        let mut v = CVector::zeros(n);
        v[0] = c(s, 0.0);
        for (k, &p) in phases.iter().enumerate() {
            v[k + 1] = Complex64::from_polar(s, p);
        }
        Ok(Self { amps: v })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_inner(self) -> CVector {
        self.amps
    }

    /// `U |psi>` for a unitary `U`.
    pub fn evolve(&self, u: &UnitaryMatrix) -> Result<PureState> {
        check_dim(u.dim(), self.dim())?;
        Ok(PureState { amps: u.matrix() * &self.amps })
    }

    /// `U^dagger |psi>`, the coordinates of the state in the basis given by the columns of `U`.
    pub fn in_basis(&self, u: &UnitaryMatrix) -> Result<PureState> {
        check_dim(u.dim(), self.dim())?;
        Ok(PureState { amps: u.matrix().ad_mul(&self.amps) })
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amps.dotc(&other.amps).norm_sqr()
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::ShapeMismatch { expected, got });
    }
    Ok(())
}

/// Square complex matrix with verified unitarity.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    m: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::ShapeMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let residual = unitarity_residual(&m);
        if !(residual <= tol) {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { m })
    }

    /// Skips validation; callers construct `m` from unitary building blocks.
    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        debug_assert!(unitarity_residual(&m) < 1e-8, "residual {}", unitarity_residual(&m));
        Self { m }
    }

    /// Row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::ShapeMismatch { expected: dim * dim, got: entries.len() });
        }
        Self::new(CMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_inner(self) -> CMatrix {
        self.m
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self { m: self.m.adjoint() }
    }

    pub fn transpose(&self) -> UnitaryMatrix {
        Self { m: self.m.transpose() }
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        check_dim(self.dim(), rhs.dim())?;
        Ok(Self { m: &self.m * &rhs.m })
    }

    /// `self^dagger * rhs`: the overlap matrix between two bases.
    pub fn overlap(&self, rhs: &UnitaryMatrix) -> Result<CMatrix> {
        check_dim(self.dim(), rhs.dim())?;
        Ok(self.m.ad_mul(&rhs.m))
    }

    pub fn kron(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        Self { m: self.m.kronecker(&rhs.m) }
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.m)
    }

    /// Max-norm distance to the identity.
    pub fn distance_to_identity(&self) -> f64 {
        max_abs(&(&self.m - CMatrix::identity(self.dim(), self.dim())))
    }

    /// Max-norm distance to another matrix.
    pub fn distance(&self, other: &UnitaryMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_abs(&(&self.m - &other.m))
    }
}

/// Traceless Hermitian generators of SU(N), normalized to `Tr s_i s_j = 2 delta_ij`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    generators: Vec<CMatrix>,
}

impl HermitianBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Builds a basis from explicit generators after checking both invariants.
    pub fn from_generators(dim: usize, generators: Vec<CMatrix>) -> Result<Self> {
        if generators.len() != dim * dim - 1 {
            return Err(Error::ShapeMismatch { expected: dim * dim - 1, got: generators.len() });
        }
        for (i, a) in generators.iter().enumerate() {
            if a.shape() != (dim, dim) || max_abs(&(a - a.adjoint())) > 1e-10 || a.trace().norm() > 1e-12 {
                return Err(Error::Precondition(format!("generator {i} is not traceless Hermitian")));
            }
            for (j, b) in generators.iter().enumerate() {
                let expected = if i == j { 2.0 } else { 0.0 };
                if ((a * b).trace() - c(expected, 0.0)).norm() > 1e-10 {
                    return Err(Error::Precondition(format!("generators {i},{j} not orthonormal")));
                }
            }
        }
        Ok(Self { dim, generators })
    }
}

/// Generalized Gell-Mann matrices: symmetric off-diagonal (j<k, lexicographic),
/// then antisymmetric, then diagonal. For `dim = 2` these are `X, Y, Z`.
pub fn su_generators(dim: usize) -> Result<HermitianBasis> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut gens = Vec::with_capacity(dim * dim - 1);
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|j| (j + 1..dim).map(move |k| (j, k))).collect();
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(dim, dim);
        m[(j, k)] = ONE;
        m[(k, j)] = ONE;
        gens.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(dim, dim);
        m[(j, k)] = -I;
        m[(k, j)] = I;
        gens.push(m);
    }
    for l in 1..dim {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..l {
            m[(j, j)] = c(scale, 0.0);
        }
        m[(l, l)] = c(-(l as f64) * scale, 0.0);
        gens.push(m);
    }
    Ok(HermitianBasis { dim, generators: gens })
}

/// Real coefficient vector of a state in a generator basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochVector {
    pub dim: usize,
    pub x: Vec<f64>,
}

impl BlochVector {
    pub fn norm_sqr(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }

    /// `rho = (I + sqrt(N(N-1)/2) sum_i x_i s_i) / N`.
    pub fn density_matrix(&self, basis: &HermitianBasis) -> CMatrix {
        let n = self.dim as f64;
        let scale = (n * (n - 1.0) / 2.0).sqrt();
        let mut rho = CMatrix::identity(self.dim, self.dim);
        for (xi, s) in self.x.iter().zip(basis.generators()) {
            rho += s * c(scale * xi, 0.0);
        }
        rho / c(n, 0.0)
    }

    /// Largest component of `2(N-2) x_k - sqrt(N(N-1)/2) Tr((x.s)^2 s_k)`,
    /// which vanishes exactly on pure states.
    pub fn constraint_residual(&self, basis: &HermitianBasis) -> f64 {
        let n = self.dim as f64;
        let scale = (n * (n - 1.0) / 2.0).sqrt();
        let mut xs = CMatrix::zeros(self.dim, self.dim);
        for (xi, s) in self.x.iter().zip(basis.generators()) {
            xs += s * c(*xi, 0.0);
        }
        let xs2 = &xs * &xs;
        self.x
            .iter()
            .zip(basis.generators())
            .map(|(xk, s)| (2.0 * (n - 2.0) * xk - scale * (&xs2 * s).trace().re).abs())
            .fold(0.0, f64::max)
    }
}

/// Bloch vector in the standard generator basis.
pub fn bloch_vector(state: &PureState) -> BlochVector {
    let basis = su_generators(state.dim()).expect("states have dim >= 2");
    bloch_vector_in(state, &basis)
}

/// Bloch vector with respect to an explicit generator basis.
pub fn bloch_vector_in(state: &PureState, basis: &HermitianBasis) -> BlochVector {
    let n = state.dim() as f64;
    let norm = (2.0 * (n - 1.0) / n).sqrt();
    let psi = state.amplitudes();
    let x = basis.generators().iter().map(|s| psi.dotc(&(s * psi)).re / norm).collect();
    BlochVector { dim: state.dim(), x }
}

fn gaussian(rng: &mut (impl Rng + ?Sized)) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-random pure state: a normalized complex Gaussian vector.
pub fn haar_state(dim: usize, rng: &mut (impl Rng + ?Sized)) -> Result<PureState> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    PureState::normalized(v)
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(dim: usize, rng: &mut (impl Rng + ?Sized)) -> Result<UnitaryMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let z = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    Ok(UnitaryMatrix { m: q })
}

/// Probabilities `|<u_i|psi>|^2` of measuring `state` in the basis formed by
/// the columns of `basis`.
pub fn measurement_probs(state: &PureState, basis: &UnitaryMatrix) -> Result<ProbabilityVector> {
    check_dim(basis.dim(), state.dim())?;
    let amps = basis.matrix().ad_mul(state.amplitudes());
    Ok(ProbabilityVector::from_weights_clamped(amps.iter().map(|z| z.norm_sqr()).collect()))
}
