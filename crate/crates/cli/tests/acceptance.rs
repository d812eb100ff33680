//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Runs with `cargo test --test acceptance`; each criterion also checks its
//! runtime budget.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, PI};
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use certlab::bases::{
    cyclic_latin_square, fourier, hadamard, is_unbiased_pair, meb_family_alpha, meb_fixture, meb_from_mubs, mub_prime, qubit_triple,
};
use certlab::bounds::{certainty_uncertainty_bounds, haar_mean_entropy, sanchez_ruiz_bounds};
use certlab::entangle::{
    canonical_two_qubit, extremize_average_entanglement, is_mutually_entangled_set, mutually_entangled_state, mutually_separable_state,
    SplittingSet,
};
use certlab::entropy::average_entropy;
use certlab::geometry::min_triangle;
use certlab::optimize::{entropy_rms, extremize_average_entropy, find_mutually_coherent, Direction, OptimizerConfig};
use certlab::qstate::{haar_state, haar_unitary};
use certlab::variance::{pq_moment_mc, quartic_sum};
use certlab::{par, rng, stats, MeasurementSet, UnitaryMatrix};
use certlab_cli::figures::random_triple;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Qubit MUB triple extrema.
fn c1() -> Outcome {
    let ms = qubit_triple(FRAC_PI_4);
    let cfg = OptimizerConfig::for_dim(2);
    let lo = extremize_average_entropy(&ms, Direction::Min, &cfg, 1).map_err(err)?;
    let hi = extremize_average_entropy(&ms, Direction::Max, &cfg, 2).map_err(err)?;
    let (want_lo, want_hi) = (2.0 / 3.0 * LN_2, 0.51580);
    check(
        (lo.value - want_lo).abs() <= 1e-3 && (hi.value - want_hi).abs() <= 1e-3,
        format!("min {:.6} (want {want_lo:.5}), max {:.6} (want {want_hi:.5})", lo.value, hi.value),
    )
}

/// Two bases always share a mutually coherent state.
fn c2() -> Outcome {
    let mut worst_res: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let mut failures = 0;
    for n in 2..=6usize {
        let results = par::map_indexed(20, |t| {
            let u = haar_unitary(n, &mut rng::stream(100 + n as u64, t as u64)).expect("n >= 2");
            let ms = MeasurementSet::with_identity(vec![u]).expect("unitary");
            find_mutually_coherent(&ms, &OptimizerConfig::for_dim(n), t as u64).expect("valid set")
        });
        for r in results {
            worst_res = worst_res.max(r.residual);
            worst_gap = worst_gap.max((r.value - (n as f64).ln()).abs());
            if !r.converged || r.residual > 1e-12 || (r.value - (n as f64).ln()).abs() > 1e-6 {
                failures += 1;
            }
        }
    }
    check(failures == 0, format!("100 pairs, {failures} failures, worst residual {worst_res:.2e}, worst |S - ln N| {worst_gap:.2e}"))
}

/// Bound sandwich on random sets and probe states.
fn c3() -> Outcome {
    let per_set = par::map_indexed(200, |k| {
        let mut r = rng::stream(300, k as u64);
        let n = 2 + k % 3;
        let l = 2 + (k / 3) % 3;
        let rest: Vec<UnitaryMatrix> = (1..l).map(|_| haar_unitary(n, &mut r).expect("n >= 2")).collect();
        let ms = MeasurementSet::with_identity(rest).expect("unitaries");
        let b = certainty_uncertainty_bounds(&ms);
        let mut violations = 0;
        for _ in 0..1000 {
            let psi = haar_state(n, &mut r).expect("n >= 2");
            let s = average_entropy(&psi, &ms).expect("dims match");
            if s < b.b_min - 1e-6 || s > b.b_max + 1e-6 {
                violations += 1;
            }
        }
        violations
    });
    let total: usize = per_set.iter().sum();
    check(total == 0, format!("200 sets x 1000 probes, {total} violations"))
}

/// Hand-checkable bound values.
fn c4() -> Outcome {
    let ih = certainty_uncertainty_bounds(&MeasurementSet::with_identity(vec![hadamard()]).map_err(err)?);
    let mub = certainty_uncertainty_bounds(&qubit_triple(FRAC_PI_4));
    // B_max for r = 1/15, L = 3, N = 2: entropy of (1 + 5/sqrt15, 1 - 1/sqrt15 (x5)) / 6, minus ln 3
    let sr = (1.0f64 / 15.0).sqrt();
    let big = (1.0 + 5.0 * sr) / 6.0;
    let small = (1.0 - sr) / 6.0;
    let want_max = -big * big.ln() - 5.0 * small * small.ln() - 3f64.ln();
    let errs = [
        (ih.b_min - 0.5 * LN_2).abs(),
        (ih.b_max - LN_2).abs(),
        (mub.b_min - 2.0 / 3.0 * LN_2).abs(),
        (mub.r - 1.0 / 15.0).abs(),
        (mub.b_max - want_max).abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    check(
        worst <= 1e-10,
        format!(
            "{{I,H}} [{:.10}, {:.10}], MUB triple [{:.10}, {:.10}] r = {:.10}, max error {worst:.1e}",
            ih.b_min, ih.b_max, mub.b_min, mub.b_max, mub.r
        ),
    )
}

/// Complete MUB sets against Sanchez-Ruiz bounds and the Haar mean.
fn c5() -> Outcome {
    let primes = [2usize, 3, 5, 7, 11, 13];
    let rows = par::map_slice(&primes, |&n| -> Result<String, String> {
        let ms = mub_prime(n).map_err(err)?;
        let cfg = OptimizerConfig::for_dim(n);
        let lo = extremize_average_entropy(&ms, Direction::Min, &cfg, 50 + n as u64).map_err(err)?;
        let hi = extremize_average_entropy(&ms, Direction::Max, &cfg, 60 + n as u64).map_err(err)?;
        let (sr_lo, sr_hi) = sanchez_ruiz_bounds(n).map_err(err)?;
        let rms = entropy_rms(&ms, 10_000, 70 + n as u64).map_err(err)?;
        let haar = haar_mean_entropy(n).map_err(err)?;
        let z = (rms.mean - haar).abs() / rms.se;
        let ok = sr_lo - 1e-9 <= lo.value && lo.value <= hi.value && hi.value <= sr_hi + 1e-9 && z <= 3.0;
        let line = format!("N={n}: [{:.4}, {:.4}] in [{sr_lo:.4}, {sr_hi:.4}], mean z={z:.2}", lo.value, hi.value);
        if ok {
            Ok(line)
        } else {
            Err(line)
        }
    });
    let failed: Vec<String> = rows.iter().filter_map(|r| r.clone().err()).collect();
    check(failed.is_empty(), if failed.is_empty() { format!("{} primes ok", primes.len()) } else { failed.join("; ") })
}

/// Mutually entangled fixtures and the MUB construction.
fn c6() -> Outcome {
    let mut bad = Vec::new();
    for n in [2, 3] {
        if !is_mutually_entangled_set(&meb_fixture(n).map_err(err)?, n, 1e-10).map_err(err)? {
            bad.push(format!("fixture {n}"));
        }
    }
    for n in [2, 3, 5] {
        let gates = meb_from_mubs(&cyclic_latin_square(n).map_err(err)?, mub_prime(n).map_err(err)?.unitaries()).map_err(err)?;
        if !is_mutually_entangled_set(&gates, n, 1e-10).map_err(err)? {
            bad.push(format!("from MUBs {n}"));
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() { "fixtures N=2,3 and constructions N=2,3,5 pass".into() } else { format!("failing: {}", bad.join(", ")) },
    )
}

/// Two-qubit witnesses and canonical round trip.
fn c7() -> Outcome {
    let witness_errs = par::map_indexed(100, |k| -> Result<(f64, f64), String> {
        let w = haar_unitary(4, &mut rng::stream(700, k as u64)).map_err(err)?;
        let e = mutually_entangled_state(&w).map_err(err)?;
        let s = mutually_separable_state(&w).map_err(err)?;
        let ent_err = (e.entropy - LN_2).abs().max((e.image_entropy - LN_2).abs());
        Ok((ent_err, s.entropy.max(s.image_entropy)))
    });
    let mut worst_ent: f64 = 0.0;
    let mut worst_sep: f64 = 0.0;
    for r in witness_errs {
        let (a, b) = r?;
        worst_ent = worst_ent.max(a);
        worst_sep = worst_sep.max(b);
    }
    let residuals = par::map_indexed(1000, |k| {
        let w = haar_unitary(4, &mut rng::stream(701, k as u64)).expect("dim 4");
        canonical_two_qubit(&w).map(|d| d.residual).unwrap_or(f64::INFINITY)
    });
    let worst_res = residuals.iter().cloned().fold(0.0, f64::max);
    check(
        worst_ent <= 1e-8 && worst_sep <= 1e-8 && worst_res <= 1e-8,
        format!("entangled |E - ln2| <= {worst_ent:.1e}, separable E <= {worst_sep:.1e}, round-trip residual <= {worst_res:.1e}"),
    )
}

/// Upper limit of the gate family is smallest at the mutually entangled point.
fn c8() -> Outcome {
    let cfg = OptimizerConfig::for_dim(4);
    let e_max = par::map_indexed(49, |i| {
        let alpha = if i == 48 { FRAC_PI_2 } else { FRAC_PI_2 * (i as f64 / 48.0) };
        let ss = SplittingSet::new(meb_family_alpha(alpha)).expect("identity first");
        extremize_average_entanglement(&ss, Direction::Max, &cfg, 800 + i as u64).expect("valid").value
    });
    let at_meb = e_max[24];
    let others = e_max.iter().enumerate().filter(|(i, _)| *i != 24).map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    check(
        (at_meb - 0.5158).abs() <= 1e-3 && at_meb <= others + 1e-9,
        format!("E_max(pi/4) = {at_meb:.6}, smallest elsewhere on the grid {others:.6}"),
    )
}

/// Fourth-moment closed form against Monte Carlo, and the quartic inequality.
fn c9() -> Outcome {
    let haar3 = haar_unitary(3, &mut rng::stream(900, 0)).map_err(err)?;
    let cases = [
        ("I2", UnitaryMatrix::identity(2), Some(7.0 / 15.0)),
        ("H", hadamard(), Some(13.0 / 30.0)),
        ("F3", fourier(3).map_err(err)?, Some(11.0 / 45.0)),
        ("Haar U3", haar3, None),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (k, (name, u, anchor)) in cases.iter().enumerate() {
        let rep = pq_moment_mc(u, 100_000, 910 + k as u64).map_err(err)?;
        let z = (rep.mc_estimate - rep.closed_form).abs() / rep.mc_se;
        let anchor_ok = anchor.is_none_or(|a| (a - rep.closed_form).abs() < 1e-12);
        ok &= z <= 3.0 && anchor_ok;
        lines.push(format!("{name} z={z:.2}"));
    }
    let mut ineq_bad = 0;
    for k in 0..1000u64 {
        let n = 2 + (k % 6) as usize;
        let u = haar_unitary(n, &mut rng::stream(920, k)).map_err(err)?;
        let excess = quartic_sum(&u) - 1.0;
        let unbiased = is_unbiased_pair(&UnitaryMatrix::identity(n), &u, 1e-10).map_err(err)?;
        if excess < -1e-12 || (excess.abs() < 1e-12) != unbiased {
            ineq_bad += 1;
        }
    }
    for n in 2..=7 {
        if (quartic_sum(&fourier(n).map_err(err)?) - 1.0).abs() > 1e-12 {
            ineq_bad += 1;
        }
    }
    ok &= ineq_bad == 0;
    lines.push(format!("quartic inequality violations {ineq_bad}"));
    check(ok, lines.join(", "))
}

/// Bloch-sphere triangle invariants.
fn c10() -> Outcome {
    let tri = min_triangle(&qubit_triple(FRAC_PI_4)).map_err(err)?;
    let cfg = OptimizerConfig::for_dim(2);
    let pairs = par::map_indexed(1000, |i| {
        let ms = random_triple(1010, i);
        let area = min_triangle(&ms).expect("qubit triple").area;
        let hi = extremize_average_entropy(&ms, Direction::Max, &cfg, i as u64).expect("valid").value;
        (area, hi)
    });
    let (areas, maxima): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let rho = stats::spearman(&areas, &maxima);
    check(
        (tri.area - PI / 2.0).abs() <= 1e-9 && (tri.perimeter - 1.5 * PI).abs() <= 1e-9 && (tri.xi - 1.0).abs() <= 1e-12 && rho <= -0.9,
        format!("MUB area {:.12}, perimeter {:.12}, xi {:.12}; Spearman(area, S_max) = {rho:.4}", tri.area, tri.perimeter, tri.xi),
    )
}

/// Same seed, byte-identical CSV, also across worker counts.
fn c11() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let jobs: [&[&str]; 3] = [
        &["two-basis-rotation", "--grid", "0:pi/2:9", "--samples", "2000"],
        &["random-triples", "--count", "40"],
        &["meb-family", "--grid", "0:pi/2:5", "--samples", "1000"],
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for job in jobs {
        let mut outputs = Vec::new();
        for (run, workers) in [(0, "4"), (1, "4"), (2, "1")] {
            let out = dir.path().join(format!("{}-{run}.csv", job[0]));
            let status = Command::new(env!("CARGO_BIN_EXE_certlab"))
                .arg("figure")
                .args(job)
                .args(["--seed", "11", "--workers", workers, "--out"])
                .arg(&out)
                .stderr(Stdio::null())
                .status()
                .map_err(err)?;
            if !status.success() {
                return Err(format!("{} exited with {status}", job[0]));
            }
            outputs.push(std::fs::read(&out).map_err(err)?);
        }
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        ok &= same;
        lines.push(format!("{} {}", job[0], if same { "identical" } else { "DIFFERS" }));
    }
    check(ok, lines.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1 qubit MUB triple extrema", c1, Duration::from_secs(10)),
        ("2 two-basis mutual coherence", c2, Duration::from_secs(60)),
        ("3 bound sandwich on random sets", c3, Duration::from_secs(120)),
        ("4 hand-checkable bound values", c4, Duration::from_secs(5)),
        ("5 MUB scaling", c5, Duration::from_secs(600)),
        ("6 mutually entangled fixtures", c6, Duration::from_secs(5)),
        ("7 two-qubit witnesses and canonical form", c7, Duration::from_secs(60)),
        ("8 gate family upper limit", c8, Duration::from_secs(120)),
        ("9 fourth moments", c9, Duration::from_secs(60)),
        ("10 triangle geometry", c10, Duration::from_secs(300)),
        ("11 reproducible CSV", c11, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let t0 = Instant::now();
        let outcome = run();
        let dt = t0.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if dt <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget {budget:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!("{} criterion {name}: {detail} [{:.2}s]", if pass { "PASS" } else { "FAIL" }, dt.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
