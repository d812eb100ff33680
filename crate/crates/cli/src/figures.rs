//! Figure jobs: one CSV row per grid point or sample, plus a JSON summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use certlab::bases::{
    cyclic_latin_square, is_prime, meb_family_alpha, meb_fixture, meb_from_mubs, mub_prime, qubit_triple, qutrit_quadruple, rotation_pair,
};
use certlab::bounds::{certainty_uncertainty_bounds, haar_mean_entropy, maassen_uffink_bound, sanchez_ruiz_bounds};
use certlab::entangle::{entanglement_rms, extremize_average_entanglement, mutual_entanglement_report, SplittingSet};
use certlab::entropy::l1_coherence;
use certlab::geometry::min_triangle;
use certlab::optimize::{entropy_rms, extremize_average_entropy, find_mutually_coherent, Direction, OptimizationResult, OptimizerConfig};
use certlab::qstate::haar_unitary;
use certlab::variance::{tsallis_variance_closed_form, tsallis_variance_mc};
use certlab::{par, rng, stats, MeasurementSet, UnitaryMatrix};
use clap::ValueEnum;
use serde::Serialize;

use crate::format::{col, ent, Cell, Column, Table};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigureId {
    /// Two qubit bases related by a real rotation.
    TwoBasisRotation,
    /// Three-basis qubit family through the MUB point.
    QubitTriple,
    /// Entropy extremes of random qubit triples against xi.
    RandomTriples,
    /// Entropy extremes of random qubit triples against triangle area and perimeter.
    GeometryScan,
    /// Complete MUB sets in prime dimensions.
    MubScaling,
    /// Four-basis qutrit family through the MUB point.
    QutritQuad,
    /// Average entanglement of the two-qubit gate family.
    MebFamily,
    /// Mutually coherent states for random pairs of bases.
    CoherentSearch,
    /// Pairwise verification of the mutually entangled constructions.
    MebVerify,
    /// Tsallis-2 variance along the qubit family, closed form against Monte Carlo.
    VarianceScan,
}

impl FigureId {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    fn uses_grid(self) -> bool {
        matches!(self, Self::TwoBasisRotation | Self::QubitTriple | Self::QutritQuad | Self::MebFamily | Self::VarianceScan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureJob {
    pub figure: FigureId,
    pub grid: Grid,
    pub seed: u64,
    /// Optimizer starts; `None` uses the per-dimension default.
    pub starts: Option<usize>,
    pub samples: usize,
    /// Number of random draws for the sampled figures.
    pub count: usize,
    /// Largest dimension for the dimension scans.
    pub max_dim: usize,
    pub tol: f64,
    pub log_bits: bool,
    pub out: PathBuf,
}

impl FigureJob {
    pub fn new(figure: FigureId, out: impl Into<PathBuf>) -> Self {
        let (count, max_dim) = match figure {
            FigureId::CoherentSearch => (20, 6),
            _ => (1000, 13),
        };
        Self {
            figure,
            grid: Grid::default_angle(),
            seed: 0,
            starts: None,
            samples: 10_000,
            count,
            max_dim,
            tol: 1e-10,
            log_bits: false,
            out: out.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.points < 2 {
            bail!("grid needs at least 2 points");
        }
        if self.starts == Some(0) {
            bail!("--starts must be positive");
        }
        if self.samples < 2 {
            bail!("--samples must be at least 2");
        }
        if self.count == 0 {
            bail!("--count must be positive");
        }
        if self.max_dim < 2 {
            bail!("--max-dim must be at least 2");
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            bail!("--tol must be positive");
        }
        Ok(())
    }

    fn config(&self, dim: usize) -> OptimizerConfig {
        let cfg = OptimizerConfig::for_dim(dim);
        match self.starts {
            Some(s) => cfg.with_starts(s),
            None => cfg,
        }
    }

    /// Path of the JSON summary next to the CSV.
    pub fn summary_path(&self) -> PathBuf {
        self.out.with_extension("json")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureSummary {
    pub figure: FigureId,
    pub seed: u64,
    pub starts: Option<usize>,
    pub samples: usize,
    pub count: usize,
    pub max_dim: usize,
    pub tol: f64,
    pub grid: Option<Grid>,
    pub log_bits: bool,
    pub parallel: bool,
    pub rows: usize,
    pub csv: PathBuf,
    pub wall_time_s: f64,
    /// Rows whose optimization did not meet its tolerance.
    pub not_converged: Vec<String>,
    /// Rows that failed a verification check.
    pub failures: Vec<String>,
    /// Figure-specific aggregate statistics.
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// Computed table with bookkeeping, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub table: Table,
    pub not_converged: Vec<String>,
    pub failures: Vec<String>,
    pub extra: serde_json::Map<String, serde_json::Value>,
}

struct Row {
    cells: Vec<Cell>,
    label: String,
    converged: bool,
    failed: bool,
}

impl Row {
    fn new(label: String, cells: Vec<Cell>) -> Self {
        Self { cells, label, converged: true, failed: false }
    }

    fn expect(mut self, results: &[&OptimizationResult]) -> Self {
        self.converged &= results.iter().all(|r| r.converged);
        self
    }
}

fn collect(columns: Vec<Column>, rows: Vec<Result<Vec<Row>>>) -> Result<FigureData> {
    let mut data = FigureData { table: Table::new(columns), not_converged: Vec::new(), failures: Vec::new(), extra: Default::default() };
    for chunk in rows {
        for row in chunk? {
            if !row.converged {
                data.not_converged.push(row.label.clone());
            }
            if row.failed {
                data.failures.push(row.label.clone());
            }
            debug_assert_eq!(row.cells.len(), data.table.columns.len());
            data.table.rows.push(row.cells);
        }
    }
    Ok(data)
}

fn extremes(ms: &MeasurementSet, cfg: &OptimizerConfig, seed: u64) -> Result<(OptimizationResult, OptimizationResult)> {
    let lo = extremize_average_entropy(ms, Direction::Min, cfg, rng::child_seed(seed, 0))?;
    let hi = extremize_average_entropy(ms, Direction::Max, cfg, rng::child_seed(seed, 1))?;
    Ok((lo, hi))
}

fn grid_rows<F>(job: &FigureJob, f: F) -> Vec<Result<Vec<Row>>>
where
    F: Fn(f64, u64) -> Result<Row> + Sync + Send,
{
    par::map_indexed(job.grid.points, |i| {
        let x = job.grid.value(i);
        f(x, rng::child_seed(job.seed, i as u64)).map(|r| vec![r])
    })
}

fn two_basis_rotation(job: &FigureJob) -> Result<FigureData> {
    let cols = vec![col("theta"), ent("s_min"), ent("s_max"), ent("b_mu"), ent("b_min_thm2"), ent("b_max_thm2"), ent("rms"), ent("rms_se")];
    let cfg = job.config(2);
    let rows = grid_rows(job, |theta, seed| {
        let ms = rotation_pair(theta);
        let (lo, hi) = extremes(&ms, &cfg, seed)?;
        let b = certainty_uncertainty_bounds(&ms);
        let rms = entropy_rms(&ms, job.samples, rng::child_seed(seed, 2))?;
        let cells = vec![
            theta.into(),
            lo.value.into(),
            hi.value.into(),
            maassen_uffink_bound(&ms)?.into(),
            b.b_min.into(),
            b.b_max.into(),
            rms.rms.into(),
            rms.rms_se.into(),
        ];
        Ok(Row::new(format!("theta={theta}"), cells).expect(&[&lo, &hi]))
    });
    collect(cols, rows)
}

fn qubit_triple_fig(job: &FigureJob) -> Result<FigureData> {
    let cols = vec![
        col("theta"),
        ent("s_min"),
        ent("s_max"),
        ent("b_min_thm2"),
        ent("b_max_thm2"),
        ent("rms"),
        ent("rms_se"),
        col("area"),
        col("perimeter"),
        col("xi"),
    ];
    let cfg = job.config(2);
    let rows = grid_rows(job, |theta, seed| {
        let ms = qubit_triple(theta);
        let (lo, hi) = extremes(&ms, &cfg, seed)?;
        let b = certainty_uncertainty_bounds(&ms);
        let rms = entropy_rms(&ms, job.samples, rng::child_seed(seed, 2))?;
        let tri = min_triangle(&ms)?;
        let cells = vec![
            theta.into(),
            lo.value.into(),
            hi.value.into(),
            b.b_min.into(),
            b.b_max.into(),
            rms.rms.into(),
            rms.rms_se.into(),
            tri.area.into(),
            tri.perimeter.into(),
            tri.xi.into(),
        ];
        Ok(Row::new(format!("theta={theta}"), cells).expect(&[&lo, &hi]))
    });
    collect(cols, rows)
}

/// `{I, U2, U3}` with Haar `U2`, `U3` drawn from stream `(seed, index)`.
pub fn random_triple(seed: u64, index: usize) -> MeasurementSet {
    let mut r = rng::stream(seed, index as u64);
    let u2 = haar_unitary(2, &mut r).expect("dimension 2");
    let u3 = haar_unitary(2, &mut r).expect("dimension 2");
    MeasurementSet::with_identity(vec![u2, u3]).expect("qubit unitaries")
}

fn random_triples(job: &FigureJob, geometry: bool) -> Result<FigureData> {
    let cols = if geometry {
        vec![col("index"), col("area"), col("perimeter"), col("xi"), ent("s_min"), ent("s_max")]
    } else {
        vec![col("index"), col("xi"), ent("s_min"), ent("s_max"), ent("b_min_thm2"), ent("b_max_thm2")]
    };
    let cfg = job.config(2);
    let rows = par::map_indexed(job.count, |i| {
        let ms = random_triple(job.seed, i);
        let (lo, hi) = extremes(&ms, &cfg, rng::child_seed(job.seed, i as u64))?;
        let tri = min_triangle(&ms)?;
        let cells = if geometry {
            vec![i.into(), tri.area.into(), tri.perimeter.into(), tri.xi.into(), lo.value.into(), hi.value.into()]
        } else {
            let b = certainty_uncertainty_bounds(&ms);
            vec![i.into(), tri.xi.into(), lo.value.into(), hi.value.into(), b.b_min.into(), b.b_max.into()]
        };
        Ok(vec![Row::new(format!("index={i}"), cells).expect(&[&lo, &hi])])
    });
    let mut data = collect(cols, rows)?;
    let t = &data.table;
    let (s_min, s_max) = (t.column("s_min").expect("column"), t.column("s_max").expect("column"));
    if geometry {
        let rho_area = stats::spearman(&t.column("area").expect("column"), &s_max);
        let rho_perim = stats::spearman(&t.column("perimeter").expect("column"), &s_min);
        data.extra.insert("spearman_area_s_max".into(), rho_area.into());
        data.extra.insert("spearman_perimeter_s_min".into(), rho_perim.into());
    } else {
        let rho = stats::spearman(&t.column("xi").expect("column"), &s_min);
        data.extra.insert("spearman_xi_s_min".into(), rho.into());
    }
    Ok(data)
}

fn mub_scaling(job: &FigureJob) -> Result<FigureData> {
    let cols = vec![col("N"), ent("s_min"), ent("s_max"), ent("s_mean"), ent("s_mean_se"), ent("haar_mean"), ent("sr_min"), ent("sr_max")];
    let dims: Vec<usize> = (2..=job.max_dim).filter(|&n| is_prime(n)).collect();
    let rows = par::map_slice(&dims, |&n| {
        let seed = rng::child_seed(job.seed, n as u64);
        let ms = mub_prime(n)?;
        let (lo, hi) = extremes(&ms, &job.config(n), seed)?;
        let rms = entropy_rms(&ms, job.samples, rng::child_seed(seed, 2))?;
        let (sr_min, sr_max) = sanchez_ruiz_bounds(n)?;
        let cells = vec![
            n.into(),
            lo.value.into(),
            hi.value.into(),
            rms.mean.into(),
            rms.se.into(),
            haar_mean_entropy(n)?.into(),
            sr_min.into(),
            sr_max.into(),
        ];
        Ok(vec![Row::new(format!("N={n}"), cells).expect(&[&lo, &hi])])
    });
    collect(cols, rows)
}

fn qutrit_quad(job: &FigureJob) -> Result<FigureData> {
    let cols = vec![
        col("theta"),
        ent("s_min"),
        ent("s_max"),
        ent("b_min_thm2"),
        ent("b_max_thm2"),
        ent("sr_min"),
        ent("sr_max"),
        ent("rms"),
        ent("rms_se"),
    ];
    let cfg = job.config(3);
    let rows = grid_rows(job, |theta, seed| {
        let ms = qutrit_quadruple(theta);
        let (lo, hi) = extremes(&ms, &cfg, seed)?;
        let b = certainty_uncertainty_bounds(&ms);
        let rms = entropy_rms(&ms, job.samples, rng::child_seed(seed, 2))?;
        let cells = vec![
            theta.into(),
            lo.value.into(),
            hi.value.into(),
            b.b_min.into(),
            b.b_max.into(),
            b.sr_min.into(),
            b.sr_max.into(),
            rms.rms.into(),
            rms.rms_se.into(),
        ];
        Ok(Row::new(format!("theta={theta}"), cells).expect(&[&lo, &hi]))
    });
    collect(cols, rows)
}

fn meb_family(job: &FigureJob) -> Result<FigureData> {
    let cols = vec![col("alpha"), ent("e_min"), ent("e_max"), ent("e_mean"), ent("rms"), ent("rms_se")];
    let cfg = job.config(4);
    let rows = grid_rows(job, |alpha, seed| {
        let ss = SplittingSet::new(meb_family_alpha(alpha))?;
        let lo = extremize_average_entanglement(&ss, Direction::Min, &cfg, rng::child_seed(seed, 0))?;
        let hi = extremize_average_entanglement(&ss, Direction::Max, &cfg, rng::child_seed(seed, 1))?;
        let rms = entanglement_rms(&ss, job.samples, rng::child_seed(seed, 2))?;
        let cells = vec![alpha.into(), lo.value.into(), hi.value.into(), rms.mean.into(), rms.rms.into(), rms.rms_se.into()];
        Ok(Row::new(format!("alpha={alpha}"), cells).expect(&[&lo, &hi]))
    });
    collect(cols, rows)
}

fn coherent_search(job: &FigureJob) -> Result<FigureData> {
    let cols = vec![col("N"), col("trial"), col("converged"), col("mismatch"), ent("value"), ent("ln_n"), col("l1_coherence")];
    let cases: Vec<(usize, usize)> = (2..=job.max_dim).flat_map(|n| (0..job.count).map(move |t| (n, t))).collect();
    let rows = par::map_slice(&cases, |&(n, t)| {
        let seed = rng::child_seed(rng::child_seed(job.seed, n as u64), t as u64);
        let u = haar_unitary(n, &mut rng::stream(seed, 0))?;
        let ms = MeasurementSet::with_identity(vec![u])?;
        let res = find_mutually_coherent(&ms, &job.config(n), rng::child_seed(seed, 1))?;
        let cells = vec![
            n.into(),
            t.into(),
            res.converged.into(),
            res.residual.into(),
            res.value.into(),
            (n as f64).ln().into(),
            l1_coherence(&res.state).into(),
        ];
        Ok(vec![Row::new(format!("N={n},trial={t}"), cells).expect(&[&res])])
    });
    collect(cols, rows)
}

fn meb_verify(job: &FigureJob) -> Result<FigureData> {
    let cols = vec![col("construction"), col("N"), col("i"), col("j"), ent("min_entropy"), ent("ln_n"), col("pass")];
    let cases = [("fixture", 2), ("fixture", 3), ("mubs", 2), ("mubs", 3), ("mubs", 5)];
    let rows = par::map_slice(&cases, |&(kind, n)| {
        let gates: Vec<UnitaryMatrix> = match kind {
            "fixture" => meb_fixture(n)?,
            _ => meb_from_mubs(&cyclic_latin_square(n)?, mub_prime(n)?.unitaries())?,
        };
        let report = mutual_entanglement_report(&gates, n, job.tol)?;
        let rows = report
            .into_iter()
            .map(|p| {
                let cells = vec![
                    kind.into(),
                    n.into(),
                    (p.i + 1).into(),
                    (p.j + 1).into(),
                    p.min_entropy.into(),
                    (n as f64).ln().into(),
                    p.pass.into(),
                ];
                let mut row = Row::new(format!("{kind} N={n} pair ({}, {})", p.i + 1, p.j + 1), cells);
                row.failed = !p.pass;
                row
            })
            .collect();
        Ok(rows)
    });
    collect(cols, rows)
}

fn variance_scan(job: &FigureJob) -> Result<FigureData> {
    let cols = vec![col("theta"), col("closed_form"), col("mc_variance"), col("mc_variance_se"), col("mc_mean")];
    let rows = grid_rows(job, |theta, seed| {
        let ms = qubit_triple(theta);
        let est = tsallis_variance_mc(&ms, job.samples, seed)?;
        let cells =
            vec![theta.into(), tsallis_variance_closed_form(&ms).into(), est.variance.into(), est.variance_se.into(), est.mean.into()];
        Ok(Row::new(format!("theta={theta}"), cells))
    });
    collect(cols, rows)
}

/// Computes the table for `job` without touching the file system.
pub fn compute_figure(job: &FigureJob) -> Result<FigureData> {
    job.validate()?;
    match job.figure {
        FigureId::TwoBasisRotation => two_basis_rotation(job),
        FigureId::QubitTriple => qubit_triple_fig(job),
        FigureId::RandomTriples => random_triples(job, false),
        FigureId::GeometryScan => random_triples(job, true),
        FigureId::MubScaling => mub_scaling(job),
        FigureId::QutritQuad => qutrit_quad(job),
        FigureId::MebFamily => meb_family(job),
        FigureId::CoherentSearch => coherent_search(job),
        FigureId::MebVerify => meb_verify(job),
        FigureId::VarianceScan => variance_scan(job),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

/// Runs `job`, writing the CSV to `job.out` and the summary next to it.
pub fn run_figure(job: &FigureJob) -> Result<FigureSummary> {
    let t0 = Instant::now();
    let data = compute_figure(job)?;
    log::info!("{}: {} rows in {:.2?}", job.figure.name(), data.table.rows.len(), t0.elapsed());
    write(&job.out, &data.table.to_csv(job.log_bits))?;
    let summary = FigureSummary {
        figure: job.figure,
        seed: job.seed,
        starts: job.starts,
        samples: job.samples,
        count: job.count,
        max_dim: job.max_dim,
        tol: job.tol,
        grid: job.figure.uses_grid().then_some(job.grid),
        log_bits: job.log_bits,
        parallel: par::parallel_enabled(),
        rows: data.table.rows.len(),
        csv: job.out.clone(),
        wall_time_s: t0.elapsed().as_secs_f64(),
        not_converged: data.not_converged,
        failures: data.failures,
        extra: data.extra,
    };
    write(&job.summary_path(), serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(summary)
}
