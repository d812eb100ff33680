//! Bloch-sphere invariants of qubit basis triples: the smallest spherical
//! triangle spanned by one point from each antipodal pair, and the
//! deviation parameter `xi`.

use serde::{Deserialize, Serialize};

use crate::entropy::MeasurementSet;
use crate::error::{Error, Result};
use crate::qstate::{check_dim, UnitaryMatrix};

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleInvariants {
    /// Smallest area (steradians).
    pub area: f64,
    /// Smallest perimeter (radians); minimized independently of `area`.
    pub perimeter: f64,
    /// Deviation parameter of the second and third bases.
    pub xi: f64,
}

/// Bloch vector of the first column of a qubit unitary; the second column
/// sits at the antipode.
pub fn basis_axis(u: &UnitaryMatrix) -> Result<Vec3> {
    check_dim(2, u.dim())?;
    let (a, b) = (u.matrix()[(0, 0)], u.matrix()[(1, 0)]);
    let ab = a.conj() * b;
    Ok([2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()])
}

fn dot(u: &Vec3, v: &Vec3) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn cross(u: &Vec3, v: &Vec3) -> Vec3 {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

/// Great-circle distance between unit vectors.
pub fn arc(u: &Vec3, v: &Vec3) -> f64 {
    dot(&cross(u, v), &cross(u, v)).sqrt().atan2(dot(u, v))
}

/// Spherical excess from the side lengths (l'Huilier).
pub fn spherical_area(a: f64, b: f64, c: f64) -> f64 {
    let s = (a + b + c) / 2.0;
    let t = (s / 2.0).tan() * ((s - a) / 2.0).tan() * ((s - b) / 2.0).tan() * ((s - c) / 2.0).tan();
    4.0 * t.max(0.0).sqrt().atan()
}

/// Minimal triangle invariants over the eight sign choices of the three axes.
pub fn min_triangle(ms: &MeasurementSet) -> Result<TriangleInvariants> {
    if ms.dim() != 2 || ms.len() != 3 {
        return Err(Error::Unsupported(format!("need three qubit bases, got L = {} in dimension {}", ms.len(), ms.dim())));
    }
    let axes: Vec<Vec3> = ms.unitaries().iter().map(basis_axis).collect::<Result<_>>()?;
    let (mut area, mut perimeter) = (f64::INFINITY, f64::INFINITY);
    for signs in 0..8u32 {
        let p: Vec<Vec3> = axes.iter().enumerate().map(|(i, v)| if signs >> i & 1 == 1 { [-v[0], -v[1], -v[2]] } else { *v }).collect();
        let (a, b, c) = (arc(&p[1], &p[2]), arc(&p[0], &p[2]), arc(&p[0], &p[1]));
        area = area.min(spherical_area(a, b, c));
        perimeter = perimeter.min(a + b + c);
    }
    let u = ms.unitaries();
    Ok(TriangleInvariants { area, perimeter, xi: xi_parameter(&u[1], &u[2])? })
}

/// `xi = sqrt((4/3) sum_j v_j (1 - v_j))` with `v = (|U2_11|^2, |U3_11|^2, |(U2^dagger U3)_11|^2)`.
pub fn xi_parameter(u2: &UnitaryMatrix, u3: &UnitaryMatrix) -> Result<f64> {
    check_dim(2, u2.dim())?;
    check_dim(2, u3.dim())?;
    let v = [u2.matrix()[(0, 0)].norm_sqr(), u3.matrix()[(0, 0)].norm_sqr(), u2.overlap(u3)?[(0, 0)].norm_sqr()];
    let s: f64 = v.iter().map(|x| x * (1.0 - x)).sum();
    Ok((4.0 / 3.0 * s).max(0.0).sqrt().min(1.0))
}
