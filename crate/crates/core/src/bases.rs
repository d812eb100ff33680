//! Basis constructions: Fourier matrices, prime-dimension MUBs, parametric
//! qubit and qutrit families, Latin squares and mutually entangled bases.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entropy::MeasurementSet;
use crate::error::{Error, Result};
use crate::qstate::{c, check_dim, CMatrix, UnitaryMatrix, I, ONE, ZERO};

/// Default tolerance for unbiasedness checks on constructed bases.
pub const UNBIASED_TOL: f64 = 1e-10;

fn root_of_unity(k: i64, n: usize) -> Complex64 {
    let k = k.rem_euclid(n as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * k / n as f64)
}

/// `F_N` with entries `e^{2 pi i jk / N} / sqrt(N)`.
pub fn fourier(n: usize) -> Result<UnitaryMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let s = 1.0 / (n as f64).sqrt();
    let m = CMatrix::from_fn(n, n, |j, k| root_of_unity((j * k) as i64, n) * s);
    Ok(UnitaryMatrix::new_unchecked(m))
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// `(1/sqrt2)[[1, 1], [1, -1]]`.
pub fn hadamard() -> UnitaryMatrix {
    let s = FRAC_1_SQRT_2;
    UnitaryMatrix::new_unchecked(CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]))
}

/// Eigenbasis of `sigma_y`: columns `(1, i)/sqrt2` and `(1, -i)/sqrt2`.
pub fn sigma_y_basis() -> UnitaryMatrix {
    let s = FRAC_1_SQRT_2;
    UnitaryMatrix::new_unchecked(CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(0.0, s), c(0.0, -s)]))
}

/// Complete set of `p + 1` mutually unbiased bases for a prime `p`.
pub fn mub_prime(p: usize) -> Result<MeasurementSet> {
    if !is_prime(p) {
        return Err(Error::Unsupported(format!("{p} is not prime; load prime-power sets from a file")));
    }
    if p == 2 {
        return MeasurementSet::with_identity(vec![hadamard(), sigma_y_basis()]);
    }
    let s = 1.0 / (p as f64).sqrt();
    let rest = (0..p)
        .map(|r| {
            let m = CMatrix::from_fn(p, p, |j, l| root_of_unity((r * j * j + j * l) as i64, p) * s);
            UnitaryMatrix::new_unchecked(m)
        })
        .collect();
    MeasurementSet::with_identity(rest)
}

/// `{I, [[cos, sin], [sin, -cos]], [[cos, sin], [i sin, -i cos]]}`; mutually
/// unbiased at `theta = pi/4`.
pub fn qubit_triple(theta: f64) -> MeasurementSet {
    let (s, co) = theta.sin_cos();
    let u2 = CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(s, 0.0), c(s, 0.0), c(-co, 0.0)]);
    let u3 = CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(s, 0.0), c(0.0, s), c(0.0, -co)]);
    MeasurementSet::with_identity(vec![UnitaryMatrix::new_unchecked(u2), UnitaryMatrix::new_unchecked(u3)]).expect("fixed shapes")
}

/// Principal fractional power of a matrix `F` with `F^4 = I`, through its
/// spectral projectors onto the eigenvalues `1, i, -1, -i`.
fn order_four_power(f: &CMatrix, t: f64) -> CMatrix {
    let n = f.nrows();
    let eig = [(ONE, 0.0), (I, PI / 2.0), (-ONE, PI), (-I, -PI / 2.0)];
    let mut out = CMatrix::zeros(n, n);
    for (lambda, arg) in eig {
        let g = f * lambda.conj();
        let mut proj = CMatrix::identity(n, n);
        let mut pow = CMatrix::identity(n, n);
        for _ in 1..4 {
            pow = &pow * &g;
            proj += &pow;
        }
        out += proj * Complex64::from_polar(0.25, t * arg);
    }
    out
}

/// `{I, F^t, D F^t, D^2 F^t}` with `t = 4 theta / pi` and
/// `D = diag(1, w, w)`, `w = e^{2 pi i/3}`.
pub fn qutrit_quadruple(theta: f64) -> MeasurementSet {
    let f = fourier(3).expect("n = 3");
    let ft = order_four_power(f.matrix(), 4.0 * theta / PI);
    let w = root_of_unity(1, 3);
    let d = CMatrix::from_diagonal(&crate::qstate::CVector::from_vec(vec![ONE, w, w]));
    let u2 = ft.clone();
    let u3 = &d * &ft;
    let u4 = &d * &u3;
    let rest = [u2, u3, u4].into_iter().map(UnitaryMatrix::new_unchecked).collect();
    MeasurementSet::with_identity(rest).expect("fixed shapes")
}

/// `{I, O(theta)}` with the real rotation `O = [[cos, sin], [-sin, cos]]`.
pub fn rotation_pair(theta: f64) -> MeasurementSet {
    let (s, co) = theta.sin_cos();
    let o = CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0)]);
    MeasurementSet::with_identity(vec![UnitaryMatrix::new_unchecked(o)]).expect("fixed shapes")
}

/// `N x N` array over the symbols `1..=N`, each used once per row and column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LatinSquareRaw")]
pub struct LatinSquare {
    size: usize,
    cells: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct LatinSquareRaw {
    size: usize,
    cells: Vec<Vec<usize>>,
}

impl TryFrom<LatinSquareRaw> for LatinSquare {
    type Error = Error;
    fn try_from(raw: LatinSquareRaw) -> Result<Self> {
        let ls = LatinSquare::new(raw.cells)?;
        check_dim(raw.size, ls.size)?;
        Ok(ls)
    }
}

impl LatinSquare {
    pub fn new(cells: Vec<Vec<usize>>) -> Result<Self> {
        let n = cells.len();
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let is_perm = |vals: Vec<usize>| {
            let mut seen = vec![false; n];
            vals.into_iter().all(|v| (1..=n).contains(&v) && !std::mem::replace(&mut seen[v - 1], true))
        };
        for (j, row) in cells.iter().enumerate() {
            check_dim(n, row.len())?;
            if !is_perm(row.clone()) {
                return Err(Error::Precondition(format!("row {} is not a permutation of 1..={n}", j + 1)));
            }
        }
        for k in 0..n {
            if !is_perm(cells.iter().map(|r| r[k]).collect()) {
                return Err(Error::Precondition(format!("column {} is not a permutation of 1..={n}", k + 1)));
            }
        }
        Ok(Self { size: n, cells })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `lambda(j, k)` with 1-based indices.
    pub fn get(&self, j: usize, k: usize) -> usize {
        self.cells[j - 1][k - 1]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }
}

/// `lambda(j, k) = ((j + k - 2) mod N) + 1`.
pub fn cyclic_latin_square(n: usize) -> Result<LatinSquare> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    LatinSquare::new((0..n).map(|j| (0..n).map(|k| (j + k) % n + 1).collect()).collect())
}

/// `P = sum_{k,l} |lambda(l,k), k><l, k|` with `|a, b>` at index `(a-1) N + (b-1)`.
pub fn latin_permutation(ls: &LatinSquare) -> UnitaryMatrix {
    let n = ls.size();
    let mut p = CMatrix::zeros(n * n, n * n);
    for l in 1..=n {
        for k in 1..=n {
            p[((ls.get(l, k) - 1) * n + (k - 1), (l - 1) * n + (k - 1))] = ONE;
        }
    }
    UnitaryMatrix::new_unchecked(p)
}

/// Unitary matrices whose entries all have modulus `1/sqrt(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HadamardFamily {
    dim: usize,
    matrices: Vec<UnitaryMatrix>,
}

impl HadamardFamily {
    pub fn new(matrices: Vec<UnitaryMatrix>) -> Result<Self> {
        let dim = matrices.first().map(UnitaryMatrix::dim).ok_or_else(|| Error::Precondition("empty Hadamard family".into()))?;
        for (i, h) in matrices.iter().enumerate() {
            check_dim(dim, h.dim())?;
            if !is_flat(h.matrix(), UNBIASED_TOL) {
                return Err(Error::Precondition(format!("member {i} is not a rescaled Hadamard matrix")));
            }
        }
        Ok(Self { dim, matrices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrices(&self) -> &[UnitaryMatrix] {
        &self.matrices
    }
}

fn is_flat(m: &CMatrix, tol: f64) -> bool {
    let n = m.nrows() as f64;
    m.iter().all(|z| (z.norm_sqr() - 1.0 / n).abs() <= tol)
}

/// Shift-and-multiply entangling gate `W = P (H_1^T + ... + H_N^T) P^T`
/// (block-diagonal sum), whose columns form a maximally entangled basis.
pub fn shift_and_multiply(ls: &LatinSquare, family: &HadamardFamily) -> Result<UnitaryMatrix> {
    let n = ls.size();
    check_dim(n, family.dim())?;
    check_dim(n, family.matrices().len())?;
    let mut block = CMatrix::zeros(n * n, n * n);
    for (j, h) in family.matrices().iter().enumerate() {
        block.view_mut((j * n, j * n), (n, n)).copy_from(&h.matrix().transpose());
    }
    let p = latin_permutation(ls);
    Ok(UnitaryMatrix::new_unchecked(p.matrix() * block * p.matrix().transpose()))
}

/// Whether every `|(U^dagger V)_kl|^2` is within `tol` of `1/N`.
pub fn is_unbiased_pair(u: &UnitaryMatrix, v: &UnitaryMatrix, tol: f64) -> Result<bool> {
    Ok(is_flat(&u.overlap(v)?, tol))
}

/// `W_i = P (I (x) M_i) P^T` for pairwise unbiased `M_i`.
pub fn meb_from_mubs(ls: &LatinSquare, mubs: &[UnitaryMatrix]) -> Result<Vec<UnitaryMatrix>> {
    let n = ls.size();
    for m in mubs {
        check_dim(n, m.dim())?;
    }
    for i in 0..mubs.len() {
        for j in i + 1..mubs.len() {
            if !is_unbiased_pair(&mubs[i], &mubs[j], UNBIASED_TOL)? {
                return Err(Error::Precondition(format!("bases {} and {} are not unbiased", i + 1, j + 1)));
            }
        }
    }
    let p = latin_permutation(ls);
    let id = UnitaryMatrix::identity(n);
    Ok(mubs
        .iter()
        .map(|m| {
            let w = p.matrix() * id.kron(m).matrix() * p.matrix().transpose();
            UnitaryMatrix::new_unchecked(w)
        })
        .collect())
}

fn from_rows(n: usize, scale: f64, entries: &[Complex64]) -> UnitaryMatrix {
    let m = CMatrix::from_row_slice(n, n, entries) * c(scale, 0.0);
    UnitaryMatrix::new(m).expect("tabulated fixture is unitary")
}

/// Tabulated mutually entangled bases: three gates on two qubits (`n = 2`)
/// or four gates on two qutrits (`n = 3`).
pub fn meb_fixture(n: usize) -> Result<Vec<UnitaryMatrix>> {
    let (o, z) = (ONE, ZERO);
    match n {
        2 => {
            let s = FRAC_1_SQRT_2;
            #[rustfmt::skip]
            let w2 = [
                o, z, z, o,
                z, o, o, z,
                z, o, -o, z,
                o, z, z, -o,
            ];
            #[rustfmt::skip]
            let w3 = [
                o, z, z, o,
                z, o, o, z,
                z, I, -I, z,
                I, z, z, -I,
            ];
            Ok(vec![UnitaryMatrix::identity(4), from_rows(4, s, &w2), from_rows(4, s, &w3)])
        }
        3 => {
            let s = 1.0 / 3f64.sqrt();
            let w = root_of_unity(1, 3);
            let w2 = w * w;
            #[rustfmt::skip]
            let m2 = [
                o, z, z, z, o, z, z, z, o,
                z, w, z, z, z, w2, o, z, z,
                z, z, w, o, z, z, z, w2, z,
                z, z, o, o, z, z, z, o, z,
                o, z, z, z, w, z, z, z, w2,
                z, w2, z, z, z, w, o, z, z,
                z, o, z, z, z, o, o, z, z,
                z, z, w2, o, z, z, z, w, z,
                o, z, z, z, w2, z, z, z, w,
            ];
            #[rustfmt::skip]
            let m3 = [
                o, z, z, z, o, z, z, z, o,
                z, w2, z, z, z, o, w, z, z,
                z, z, w2, w, z, z, z, o, z,
                z, z, o, o, z, z, z, o, z,
                w, z, z, z, w2, z, z, z, o,
                z, o, z, z, z, w2, w, z, z,
                z, o, z, z, z, o, o, z, z,
                z, z, o, w, z, z, z, w2, z,
                w, z, z, z, o, z, z, z, w2,
            ];
            #[rustfmt::skip]
            let m4 = [
                o, z, z, z, o, z, z, z, o,
                z, o, z, z, z, w, w2, z, z,
                z, z, o, w2, z, z, z, w, z,
                z, z, o, o, z, z, z, o, z,
                w2, z, z, z, o, z, z, z, w,
                z, w, z, z, z, o, w2, z, z,
                z, o, z, z, z, o, o, z, z,
                z, z, w, w2, z, z, z, o, z,
                w2, z, z, z, w, z, z, z, o,
            ];
            Ok(vec![UnitaryMatrix::identity(9), from_rows(9, s, &m2), from_rows(9, s, &m3), from_rows(9, s, &m4)])
        }
        _ => Err(Error::Unsupported(format!("no tabulated entangled bases for local dimension {n}"))),
    }
}

/// Two-qubit gate family `{I, W_1(alpha), W_2(alpha)}`, interpolating between
/// three identical bases (`alpha = 0`) and mutually entangled ones (`alpha = pi/4`).
pub fn meb_family_alpha(alpha: f64) -> Vec<UnitaryMatrix> {
    let (s, co) = alpha.sin_cos();
    let (cs, sn, z) = (c(co, 0.0), c(s, 0.0), ZERO);
    #[rustfmt::skip]
    let w1 = [
        cs, z, z, sn,
        z, cs, sn, z,
        z, sn, -cs, z,
        sn, z, z, -cs,
    ];
    #[rustfmt::skip]
    let w2 = [
        cs, z, z, sn,
        z, cs, sn, z,
        z, I * sn, -I * cs, z,
        I * sn, z, z, -I * cs,
    ];
    vec![
        UnitaryMatrix::identity(4),
        UnitaryMatrix::new_unchecked(CMatrix::from_row_slice(4, 4, &w1)),
        UnitaryMatrix::new_unchecked(CMatrix::from_row_slice(4, 4, &w2)),
    ]
}
