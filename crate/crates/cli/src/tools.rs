//! One-shot tools that read JSON inputs and print a JSON report.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use certlab::bases::{
    cyclic_latin_square, hadamard, is_prime, meb_fixture, meb_from_mubs, mub_prime, qubit_triple, qutrit_quadruple, rotation_pair,
    LatinSquare,
};
use certlab::bounds::{certainty_uncertainty_bounds, BoundsReport};
use certlab::entangle::{canonical_two_qubit, mutual_entanglement_report, PairCheck};
use certlab::io::{basis_set_json, read_basis_set, read_latin_square, read_unitary, MatrixJson};
use certlab::optimize::{coherent_phases, CoherentPhases, OptimizerConfig};
use certlab::{MeasurementSet, UnitaryMatrix};
use serde::Serialize;

use crate::grid::parse_angle;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentReport {
    pub dim: usize,
    #[serde(flatten)]
    pub phases: CoherentPhases,
}

/// Flat-amplitude state whose image under the gate in `input` is also flat.
pub fn coherent(input: &Path, tol: f64, starts: Option<usize>, seed: u64) -> Result<CoherentReport> {
    let u = read_unitary(input, tol).with_context(|| format!("reading {}", input.display()))?;
    let mut cfg = OptimizerConfig::for_dim(u.dim());
    if let Some(s) = starts {
        cfg = cfg.with_starts(s);
    }
    let phases = coherent_phases(&u, &cfg, seed)?;
    Ok(CoherentReport { dim: u.dim(), phases })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MebSource<'a> {
    FromMubs,
    Fixture,
    Input(&'a Path),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MebReport {
    pub local_dim: usize,
    pub construction: String,
    pub gates: Vec<MatrixJson>,
    pub pairs: Vec<PairCheck>,
    pub pass: bool,
}

/// Builds or loads a set of two-party gates and checks every pair.
pub fn meb(dim: usize, source: MebSource, latin: Option<&Path>, tol: f64) -> Result<MebReport> {
    if dim < 2 {
        bail!("--dim must be at least 2");
    }
    let (construction, gates) = match source {
        MebSource::FromMubs => {
            if !is_prime(dim) {
                bail!("--from-mubs needs a prime dimension, got {dim}");
            }
            let ls: LatinSquare = match latin {
                Some(p) => read_latin_square(p).with_context(|| format!("reading {}", p.display()))?,
                None => cyclic_latin_square(dim)?,
            };
            ("mubs".to_string(), meb_from_mubs(&ls, mub_prime(dim)?.unitaries())?)
        }
        MebSource::Fixture => ("fixture".to_string(), meb_fixture(dim)?),
        MebSource::Input(p) => {
            let gates = read_basis_set(p, tol, false).with_context(|| format!("reading {}", p.display()))?;
            (p.display().to_string(), gates)
        }
    };
    let pairs = mutual_entanglement_report(&gates, dim, tol)?;
    let pass = pairs.iter().all(|p| p.pass);
    Ok(MebReport { local_dim: dim, construction, gates: basis_set_json(&gates), pairs, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalReport {
    pub a: MatrixJson,
    pub b: MatrixJson,
    pub c: MatrixJson,
    pub d: MatrixJson,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    /// Coefficients of `XX`, `YY`, `ZZ` in the interaction.
    pub interaction: [f64; 3],
    pub phase: f64,
    pub residual: f64,
}

/// Local-times-canonical factorization of the two-qubit gate in `input`.
pub fn canonical(input: &Path, tol: f64) -> Result<CanonicalReport> {
    let w = read_unitary(input, tol).with_context(|| format!("reading {}", input.display()))?;
    let k = canonical_two_qubit(&w)?;
    let (x, y, z) = k.interaction();
    Ok(CanonicalReport {
        a: (&k.a).into(),
        b: (&k.b).into(),
        c: (&k.c).into(),
        d: (&k.d).into(),
        b1: k.b1,
        b2: k.b2,
        b3: k.b3,
        interaction: [x, y, z],
        phase: k.phase,
        residual: k.residual,
    })
}

/// Measurement set named by a preset: `hadamard-pair`, `qubit-triple:THETA`,
/// `rotation:THETA`, `mub:P` or `qutrit-quad:THETA`.
pub fn preset(spec: &str) -> Result<MeasurementSet> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let angle = || -> Result<f64> {
        let a = arg.ok_or_else(|| anyhow!("preset `{name}` needs an argument, e.g. {name}:pi/4"))?;
        parse_angle(a).map_err(|e| anyhow!(e))
    };
    Ok(match name {
        "hadamard-pair" => MeasurementSet::with_identity(vec![hadamard()])?,
        "qubit-triple" => qubit_triple(angle()?),
        "rotation" => rotation_pair(angle()?),
        "qutrit-quad" => qutrit_quadruple(angle()?),
        "mub" => {
            let p = arg.ok_or_else(|| anyhow!("preset `mub` needs a prime, e.g. mub:5"))?;
            mub_prime(p.parse().with_context(|| format!("bad prime `{p}`"))?)?
        }
        _ => bail!("unknown preset `{name}`"),
    })
}

/// Full bounds report for a basis-set file (made relative to its first member)
/// or a preset.
pub fn bounds(set: Option<&Path>, preset_spec: Option<&str>, tol: f64) -> Result<BoundsReport> {
    let ms = match (set, preset_spec) {
        (Some(p), None) => {
            let us: Vec<UnitaryMatrix> = read_basis_set(p, tol, false).with_context(|| format!("reading {}", p.display()))?;
            MeasurementSet::relative_to_first(us)?
        }
        (None, Some(s)) => preset(s)?,
        _ => bail!("give exactly one of --set and --preset"),
    };
    Ok(certainty_uncertainty_bounds(&ms))
}
