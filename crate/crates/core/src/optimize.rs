//! Multi-start optimization over pure states: average-entropy extrema,
//! mutually coherent states, and Haar-average entropy fluctuations.
//!
//! States are parametrized by an unconstrained `x in R^{2N}` with
//! `psi = x / |x|`; every start runs L-BFGS with an analytic gradient.

use std::f64::consts::TAU;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::entropy::{average_entropy, MeasurementSet};
use crate::error::{Error, Result};
use crate::lbfgs::{self, LbfgsConfig};
use crate::par;
use crate::qstate::{c, haar_state, CMatrix, CVector, PureState, UnitaryMatrix};
use crate::rng;
use crate::stats;

/// Probabilities below this contribute nothing to entropy gradients.
const P_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Min => 1.0,
            Direction::Max => -1.0,
        }
    }

    /// Whether `a` is strictly better than `b`.
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Min => a < b,
            Direction::Max => a > b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iters: usize,
    /// Per-start stopping tolerance on the objective change.
    pub f_tol: f64,
    /// Mismatch below which a mutually coherent state counts as found.
    pub coherent_tol: f64,
}

impl OptimizerConfig {
    /// Default budget for states of dimension `dim`: 32 starts up to
    /// dimension 4, 128 above.
    pub fn for_dim(dim: usize) -> Self {
        Self { starts: if dim <= 4 { 32 } else { 128 }, max_iters: 10_000, f_tol: 1e-12, coherent_tol: 1e-12 }
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    fn lbfgs(&self) -> LbfgsConfig {
        LbfgsConfig { max_iters: self.max_iters, f_tol: self.f_tol, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.max_iters == 0 {
            return Err(Error::Precondition("starts and max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub state: PureState,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    /// Index of the start that produced the result.
    pub best_start: usize,
    /// Number of starts whose local run converged.
    pub starts_converged: usize,
}

/// Smooth function of a pure state.
pub trait SphereObjective: Sync {
    fn dim(&self) -> usize;

    /// Returns `f(psi)` and writes `2 df/d(conj psi)` into `grad`.
    fn value_grad(&self, psi: &CVector, grad: &mut CVector) -> f64;
}

fn unpack(x: &[f64]) -> (CVector, f64) {
    let n = x.len() / 2;
    let v = CVector::from_fn(n, |i, _| c(x[i], x[n + i]));
    let r = v.norm();
    (v / c(r, 0.0), r)
}

fn pack(psi: &CVector) -> Vec<f64> {
    psi.iter().map(|z| z.re).chain(psi.iter().map(|z| z.im)).collect()
}

struct LocalRun {
    state: CVector,
    value: f64,
    converged: bool,
    iterations: usize,
    residual: f64,
}

fn run_sphere<O: SphereObjective + ?Sized>(obj: &O, dir: Direction, start: &CVector, cfg: &LbfgsConfig) -> LocalRun {
    let n = obj.dim();
    let sign = dir.sign();
    let mut grad = CVector::zeros(n);
    let out = lbfgs::minimize(
        pack(start),
        |x, gx| {
            let (psi, r) = unpack(x);
            let f = obj.value_grad(&psi, &mut grad);
            // project out the radial and global-phase-free normal direction
            let radial = psi.dotc(&grad).re;
            for i in 0..n {
                let gi = (grad[i] - psi[i] * radial) * (sign / r);
                gx[i] = gi.re;
                gx[n + i] = gi.im;
            }
            sign * f
        },
        cfg,
    );
    let (state, _) = unpack(&out.x);
    LocalRun { state, value: sign * out.f, converged: out.converged, iterations: out.iterations, residual: out.residual }
}

fn best_index(runs: &[LocalRun], dir: Direction) -> usize {
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if dir.better(r.value, runs[best].value) {
            best = i;
        }
    }
    best
}

fn reduce(runs: Vec<LocalRun>, dir: Direction) -> Result<OptimizationResult> {
    let best = best_index(&runs, dir);
    take(runs, best)
}

fn take(runs: Vec<LocalRun>, best: usize) -> Result<OptimizationResult> {
    let starts_converged = runs.iter().filter(|r| r.converged).count();
    let r = runs.into_iter().nth(best).expect("at least one start");
    Ok(OptimizationResult {
        state: PureState::normalized(r.state)?,
        value: r.value,
        converged: r.converged,
        iterations: r.iterations,
        residual: r.residual,
        best_start: best,
        starts_converged,
    })
}

/// Multi-start extremization of a sphere objective. Start `i` begins at a
/// Haar-random state drawn from stream `(seed, i)`; ties go to the lower index.
pub fn multistart<O: SphereObjective>(obj: &O, dir: Direction, cfg: &OptimizerConfig, seed: u64) -> Result<OptimizationResult> {
    cfg.validate()?;
    let lb = cfg.lbfgs();
    let runs = par::map_indexed(cfg.starts, |i| {
        let mut rng = rng::stream(seed, i as u64);
        let start = haar_state(obj.dim(), &mut rng).expect("dim >= 2").into_inner();
        run_sphere(obj, dir, &start, &lb)
    });
    reduce(runs, dir)
}

/// Average Shannon entropy over the bases of a measurement set.
pub struct EntropyObjective {
    dim: usize,
    bases: Vec<CMatrix>,
}

impl EntropyObjective {
    pub fn new(ms: &MeasurementSet) -> Self {
        Self { dim: ms.dim(), bases: ms.unitaries().iter().map(|u| u.matrix().clone()).collect() }
    }
}

impl SphereObjective for EntropyObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_grad(&self, psi: &CVector, grad: &mut CVector) -> f64 {
        let l = self.bases.len() as f64;
        grad.fill(c(0.0, 0.0));
        let mut s = 0.0;
        for u in &self.bases {
            let mut g = u.ad_mul(psi);
            for z in g.iter_mut() {
                let p = z.norm_sqr();
                if p > P_FLOOR {
                    let lp = p.ln();
                    s -= p * lp;
                    *z *= -(lp + 1.0);
                } else {
                    *z = c(0.0, 0.0);
                }
            }
            grad.gemv(c(2.0 / l, 0.0), u, &g, c(1.0, 0.0));
        }
        s / l
    }
}

/// Smallest or largest average entropy over pure states.
pub fn extremize_average_entropy(ms: &MeasurementSet, dir: Direction, cfg: &OptimizerConfig, seed: u64) -> Result<OptimizationResult> {
    let obj = EntropyObjective::new(ms);
    let mut res = multistart(&obj, dir, cfg, seed)?;
    res.value = average_entropy(&res.state, ms)?.clamp(0.0, (ms.dim() as f64).ln());
    Ok(res)
}

/// Squared deviation from flat outcome distributions over all bases,
/// for `psi = (1, e^{i phi_1}, ..., e^{i phi_{N-1}}) / sqrt(N)`.
struct CoherenceMismatch<'a> {
    bases: &'a [CMatrix],
    dim: usize,
}

impl CoherenceMismatch<'_> {
    fn state(&self, phi: &[f64]) -> CVector {
        let s = 1.0 / (self.dim as f64).sqrt();
        CVector::from_fn(self.dim, |i, _| if i == 0 { c(s, 0.0) } else { num_complex::Complex64::from_polar(s, phi[i - 1]) })
    }

    fn value_grad(&self, phi: &[f64], gphi: &mut [f64]) -> f64 {
        let psi = self.state(phi);
        let flat = 1.0 / self.dim as f64;
        let mut f = 0.0;
        let mut d = CVector::zeros(self.dim);
        for u in self.bases {
            let mut g = u.ad_mul(&psi);
            for z in g.iter_mut() {
                let dev = z.norm_sqr() - flat;
                f += dev * dev;
                *z *= 2.0 * dev;
            }
            d.gemv(c(1.0, 0.0), u, &g, c(1.0, 0.0));
        }
        for m in 1..self.dim {
            // df/dphi = 2 Re(conj(df/dpsi*) i psi)
            gphi[m - 1] = 2.0 * (d[m].conj() * psi[m] * c(0.0, 1.0)).re;
        }
        f
    }
}

/// Searches the phase torus for a state with flat outcome distributions in
/// every basis. `value` is the average entropy of the best state and
/// `residual` its mismatch; `converged` means the mismatch is at most
/// `cfg.coherent_tol`. Start 0 is the all-zero phase vector.
pub fn find_mutually_coherent(ms: &MeasurementSet, cfg: &OptimizerConfig, seed: u64) -> Result<OptimizationResult> {
    cfg.validate()?;
    if ms.len() < 2 {
        return Err(Error::Precondition("need at least two bases".into()));
    }
    let bases: Vec<CMatrix> = ms.unitaries().iter().map(|u| u.matrix().clone()).collect();
    let obj = CoherenceMismatch { bases: &bases, dim: ms.dim() };
    let lb = LbfgsConfig { f_target: cfg.coherent_tol * 1e-4, ..cfg.lbfgs() };
    let runs = par::map_indexed(cfg.starts, |i| {
        let phi0: Vec<f64> = if i == 0 {
            vec![0.0; ms.dim() - 1]
        } else {
            let mut rng = rng::stream(seed, i as u64);
            (1..ms.dim()).map(|_| rng.random::<f64>() * TAU).collect()
        };
        let out = lbfgs::minimize(phi0, |p, g| obj.value_grad(p, g), &lb);
        LocalRun {
            state: obj.state(&out.x),
            value: out.f,
            converged: out.f <= cfg.coherent_tol,
            iterations: out.iterations,
            residual: out.f,
        }
    });
    // every converged start is an equally good witness; keep the first one
    let pick = runs.iter().position(|r| r.converged).unwrap_or_else(|| best_index(&runs, Direction::Min));
    let mut res = take(runs, pick)?;
    res.value = average_entropy(&res.state, ms)?;
    Ok(res)
}

/// Phases of a state `psi` with flat amplitudes whose image `U psi` is also flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentPhases {
    /// `arg psi_j`, with `phi_1 = 0`.
    pub phi: Vec<f64>,
    /// `arg (U psi)_j`.
    pub omega: Vec<f64>,
    /// Largest deviation of `|(U psi)_j|` from `1/sqrt(N)`.
    pub residual: f64,
}

/// Certified pair of phase vectors with `U |psi^phi> = |psi^omega>`.
pub fn coherent_phases(u: &UnitaryMatrix, cfg: &OptimizerConfig, seed: u64) -> Result<CoherentPhases> {
    let ms = MeasurementSet::with_identity(vec![u.adjoint()])?;
    let res = find_mutually_coherent(&ms, cfg, seed)?;
    if !res.converged {
        return Err(Error::NotFound(format!("no coherent state found, mismatch {:.3e}", res.residual)));
    }
    let psi = res.state.amplitudes();
    let image = u.matrix() * psi;
    let flat = 1.0 / (u.dim() as f64).sqrt();
    let residual = image.iter().map(|z| (z.norm() - flat).abs()).fold(0.0, f64::max);
    if residual > 1e-6 {
        return Err(Error::NotFound(format!("image is not flat, residual {residual:.3e}")));
    }
    let phase0 = psi[0].arg();
    let phi = psi.iter().map(|z| wrap((z.arg() - phase0).rem_euclid(TAU))).collect();
    let omega = image.iter().map(|z| (z.arg() - phase0).rem_euclid(TAU)).map(wrap).collect();
    Ok(CoherentPhases { phi, omega, residual })
}

/// Maps angles within rounding of `2 pi` back to zero.
fn wrap(a: f64) -> f64 {
    if TAU - a < 1e-12 {
        0.0
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyRms {
    /// Mean of the average entropy over Haar states.
    pub mean: f64,
    /// Root-mean-square deviation around the mean.
    pub rms: f64,
    /// Standard error of `mean`.
    pub se: f64,
    /// Delta-method standard error of `rms`.
    pub rms_se: f64,
}

/// Monte Carlo mean and fluctuation of the average entropy over Haar states.
pub fn entropy_rms(ms: &MeasurementSet, samples: usize, seed: u64) -> Result<EntropyRms> {
    if samples < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    let m = stats::monte_carlo_scalar(samples, seed, |r| {
        let psi = haar_state(ms.dim(), r).expect("dim >= 2");
        average_entropy(&psi, ms).expect("matching dims")
    });
    let rms = m.population_variance().sqrt();
    let rms_se = if rms > 0.0 { m.variance_se() / (2.0 * rms) } else { 0.0 };
    Ok(EntropyRms { mean: m.mean, rms, se: m.mean_se(), rms_se })
}
