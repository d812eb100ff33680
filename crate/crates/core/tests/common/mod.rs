#![allow(dead_code)]

use certlab::qstate::{haar_state, haar_unitary};
use certlab::{rng, MeasurementSet, PureState, UnitaryMatrix};

pub fn unitary(n: usize, seed: u64, index: u64) -> UnitaryMatrix {
    haar_unitary(n, &mut rng::stream(seed, index)).unwrap()
}

pub fn state(n: usize, seed: u64, index: u64) -> PureState {
    haar_state(n, &mut rng::stream(seed, index)).unwrap()
}

/// `{I, U_2, ..., U_L}` with Haar `U_j`.
pub fn random_set(n: usize, l: usize, seed: u64) -> MeasurementSet {
    let mut all = vec![UnitaryMatrix::identity(n)];
    all.extend((1..l).map(|j| unitary(n, seed, j as u64)));
    MeasurementSet::new(all).unwrap()
}
