//! Entropic certainty and uncertainty bounds for sets of orthogonal
//! measurements, mutually coherent states, and mutually entangled bases.

// Negated float comparisons are used to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bases;
pub mod bounds;
pub mod entangle;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod io;
mod lbfgs;
pub mod optimize;
pub mod par;
pub mod qstate;
pub mod rng;
pub mod stats;
pub mod variance;

pub use entropy::{MeasurementSet, ProbabilityVector};
pub use error::{Error, Result};
pub use qstate::{CMatrix, CVector, PureState, UnitaryMatrix};
