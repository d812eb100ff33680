//! JSON formats shared by the library and the command line.
//!
//! Matrices are `{"dim": N, "entries": [[re, im], ...]}` in row-major order,
//! states are `{"dim": N, "amplitudes": [[re, im], ...]}`, basis sets are
//! JSON arrays of matrices and Latin squares are `{"size": N, "cells": [[...]]}`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bases::{is_unbiased_pair, LatinSquare};
use crate::error::{Error, Result};
use crate::qstate::{CMatrix, CVector, PureState, UnitaryMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let entries = (0..dim).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|ij| pair(&m[ij])).collect();
        Self { dim, entries }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::ShapeMismatch { expected: self.dim * self.dim, got: self.entries.len() });
        }
        let zs: Vec<Complex64> = self.entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        Ok(CMatrix::from_row_slice(self.dim, self.dim, &zs))
    }

    /// Converts and checks unitarity within `tol`.
    pub fn to_unitary(&self, tol: f64) -> Result<UnitaryMatrix> {
        UnitaryMatrix::with_tolerance(self.to_matrix()?, tol)
    }
}

impl From<&UnitaryMatrix> for MatrixJson {
    fn from(u: &UnitaryMatrix) -> Self {
        Self::from_matrix(u.matrix())
    }
}

impl StateJson {
    pub fn to_state(&self) -> Result<PureState> {
        if self.amplitudes.len() != self.dim {
            return Err(Error::ShapeMismatch { expected: self.dim, got: self.amplitudes.len() });
        }
        PureState::new(CVector::from_iterator(self.dim, self.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im))))
    }
}

impl From<&PureState> for StateJson {
    fn from(s: &PureState) -> Self {
        Self { dim: s.dim(), amplitudes: s.amplitudes().iter().map(pair).collect() }
    }
}

fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn parse_unitary(json: &str, tol: f64) -> Result<UnitaryMatrix> {
    serde_json::from_str::<MatrixJson>(json)?.to_unitary(tol)
}

pub fn read_unitary(path: &Path, tol: f64) -> Result<UnitaryMatrix> {
    read::<MatrixJson>(path)?.to_unitary(tol)
}

pub fn read_state(path: &Path) -> Result<PureState> {
    read::<StateJson>(path)?.to_state()
}

pub fn read_latin_square(path: &Path) -> Result<LatinSquare> {
    read(path)
}

/// Parses a basis set, checking unitarity of each member and, if requested,
/// pairwise unbiasedness.
pub fn parse_basis_set(json: &str, tol: f64, require_unbiased: bool) -> Result<Vec<UnitaryMatrix>> {
    let raw: Vec<MatrixJson> = serde_json::from_str(json)?;
    let mut out = Vec::with_capacity(raw.len());
    for (i, m) in raw.iter().enumerate() {
        let u = m.to_unitary(tol).map_err(|e| Error::Precondition(format!("basis {}: {e}", i + 1)))?;
        out.push(u);
    }
    if require_unbiased {
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                if !is_unbiased_pair(&out[i], &out[j], tol)? {
                    return Err(Error::Precondition(format!("bases {} and {} are not unbiased", i + 1, j + 1)));
                }
            }
        }
    }
    Ok(out)
}

pub fn read_basis_set(path: &Path, tol: f64, require_unbiased: bool) -> Result<Vec<UnitaryMatrix>> {
    parse_basis_set(&fs::read_to_string(path)?, tol, require_unbiased)
}

pub fn basis_set_json(us: &[UnitaryMatrix]) -> Vec<MatrixJson> {
    us.iter().map(MatrixJson::from).collect()
}
