use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use certlab::par;
use certlab_cli::figures::{run_figure, FigureId, FigureJob};
use certlab_cli::tools::{self, MebSource};
use certlab_cli::{exit, Grid};
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "certlab", version, about = "Entropic certainty and uncertainty bounds for quantum measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Base seed for every random stream.
    #[arg(long, env = "CERTLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Optimizer starts (default depends on the dimension).
    #[arg(long, env = "CERTLAB_STARTS")]
    starts: Option<usize>,
    /// Numerical tolerance for unitarity and verification checks.
    #[arg(long, env = "CERTLAB_TOL", default_value_t = 1e-10)]
    tol: f64,
    /// Worker threads (default: all cores).
    #[arg(long, env = "CERTLAB_WORKERS")]
    workers: Option<usize>,
    /// Output path (figures: CSV, summary goes next to it; tools: JSON, default stdout).
    #[arg(long, env = "CERTLAB_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the data behind one figure as CSV plus a JSON summary.
    Figure {
        #[arg(value_enum)]
        id: FigureId,
        #[command(flatten)]
        common: Common,
        /// Parameter grid start:stop:points; angles accept pi, e.g. 0:pi/2:97.
        #[arg(long, env = "CERTLAB_GRID", default_value = "0:pi/2:97")]
        grid: Grid,
        /// Monte Carlo samples per row.
        #[arg(long, env = "CERTLAB_SAMPLES", default_value_t = 10_000)]
        samples: usize,
        /// Random draws for the sampled figures (default 1000, 20 per dimension for coherent-search).
        #[arg(long, env = "CERTLAB_COUNT")]
        count: Option<usize>,
        /// Largest dimension for the dimension scans (default 13, 6 for coherent-search).
        #[arg(long, env = "CERTLAB_MAX_DIM")]
        max_dim: Option<usize>,
        /// Report entropy columns in bits instead of nats.
        #[arg(long, env = "CERTLAB_LOG_BITS")]
        log_bits: bool,
    },
    /// Find a state with flat amplitudes in both the computational basis and the given one.
    Coherent {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Construct or load mutually entangled bases and verify every pair.
    #[command(group(ArgGroup::new("source").required(true).args(["from_mubs", "fixture", "input"])))]
    Meb {
        /// Local dimension N of each party.
        #[arg(long)]
        dim: usize,
        /// Shift-and-multiply construction from the prime-dimension MUBs.
        #[arg(long)]
        from_mubs: bool,
        /// Tabulated sets for N = 2 and N = 3.
        #[arg(long)]
        fixture: bool,
        /// JSON array of gates to verify.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Latin square for --from-mubs (default: cyclic).
        #[arg(long, requires = "from_mubs")]
        latin: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Canonical decomposition of a two-qubit gate.
    Canonical {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Analytic bounds for a measurement set.
    #[command(group(ArgGroup::new("which").required(true).args(["set", "preset"])))]
    Bounds {
        /// JSON array of unitaries; taken relative to the first one.
        #[arg(long)]
        set: Option<PathBuf>,
        /// hadamard-pair, qubit-triple:THETA, rotation:THETA, mub:P or qutrit-quad:THETA.
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Figure { common, .. }
            | Command::Coherent { common, .. }
            | Command::Meb { common, .. }
            | Command::Canonical { common, .. }
            | Command::Bounds { common, .. } => common,
        }
    }
}

fn emit<T: Serialize>(report: &T, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Command) -> Result<i32> {
    let common = cmd.common();
    if common.workers == Some(0) {
        anyhow::bail!("--workers must be positive");
    }
    if common.tol.is_nan() || common.tol <= 0.0 {
        anyhow::bail!("--tol must be positive");
    }
    let (seed, starts, tol, out) = (common.seed, common.starts, common.tol, common.out.clone());
    match cmd {
        Command::Figure { id, grid, samples, count, max_dim, log_bits, .. } => {
            let mut job = FigureJob::new(id, out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", id.name()))));
            job.grid = grid;
            job.seed = seed;
            job.starts = starts;
            job.samples = samples;
            job.tol = tol;
            job.log_bits = log_bits;
            job.count = count.unwrap_or(job.count);
            job.max_dim = max_dim.unwrap_or(job.max_dim);
            let summary = run_figure(&job)?;
            eprintln!("wrote {} rows to {} ({:.2} s)", summary.rows, job.out.display(), summary.wall_time_s);
            if !summary.failures.is_empty() {
                log::error!("verification failed: {}", summary.failures.join("; "));
                return Ok(exit::INVALID);
            }
            if !summary.not_converged.is_empty() {
                log::warn!("{} rows did not converge: {}", summary.not_converged.len(), summary.not_converged.join("; "));
                return Ok(exit::NOT_CONVERGED);
            }
            Ok(exit::OK)
        }
        Command::Coherent { input, .. } => match tools::coherent(&input, tol, starts, seed) {
            Ok(r) => emit(&r, out.as_ref()).map(|_| exit::OK),
            Err(e) if matches!(e.downcast_ref(), Some(certlab::Error::NotFound(_))) => {
                log::error!("{e:#}");
                Ok(exit::NOT_CONVERGED)
            }
            Err(e) => Err(e),
        },
        Command::Meb { dim, from_mubs, fixture, input, latin, .. } => {
            let source = match (from_mubs, fixture, input.as_deref()) {
                (true, _, _) => MebSource::FromMubs,
                (_, true, _) => MebSource::Fixture,
                (_, _, Some(p)) => MebSource::Input(p),
                _ => unreachable!("clap enforces one source"),
            };
            let r = tools::meb(dim, source, latin.as_deref(), tol)?;
            emit(&r, out.as_ref())?;
            if !r.pass {
                for p in r.pairs.iter().filter(|p| !p.pass) {
                    log::error!("pair ({}, {}) fails: min entanglement {:.3e}", p.i + 1, p.j + 1, p.min_entropy);
                }
                return Ok(exit::INVALID);
            }
            Ok(exit::OK)
        }
        Command::Canonical { input, .. } => emit(&tools::canonical(&input, tol)?, out.as_ref()).map(|_| exit::OK),
        Command::Bounds { set, preset, .. } => {
            emit(&tools::bounds(set.as_deref(), preset.as_deref(), tol)?, out.as_ref()).map(|_| exit::OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CERTLAB_LOG", "warn")).init();
    let cli = Cli::parse();
    let workers = cli.command.common().workers;
    let code = par::install(workers, || match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit::INVALID
        }
    });
    ExitCode::from(code as u8)
}
