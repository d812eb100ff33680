//! Limited-memory BFGS with Armijo backtracking, for smooth objectives on `R^n`.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LbfgsConfig {
    pub max_iters: usize,
    /// Stop when an accepted step changes `f` by at most this much.
    pub f_tol: f64,
    /// Stop when the gradient norm drops below this.
    pub g_tol: f64,
    /// Stop as soon as `f` falls below this value.
    pub f_target: f64,
    pub memory: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { max_iters: 10_000, f_tol: 1e-12, g_tol: 1e-13, f_target: f64::NEG_INFINITY, memory: 8 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    /// `|f_k - f_{k-1}|` of the last iteration.
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which writes its gradient into the second argument.
pub(crate) fn minimize<F>(x0: Vec<f64>, mut f: F, cfg: &LbfgsConfig) -> LbfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut alpha = vec![0.0; cfg.memory];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        if fx <= cfg.f_target || dot(&g, &g).sqrt() <= cfg.g_tol {
            break;
        }
        iterations += 1;

        // two-loop recursion for d = -H g
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        for (i, (s, y, rho)) in hist.iter().enumerate().rev() {
            alpha[i] = rho * dot(s, &d);
            for (dj, yj) in d.iter_mut().zip(y) {
                *dj -= alpha[i] * yj;
            }
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= gamma);
        }
        for (i, (s, y, rho)) in hist.iter().enumerate() {
            let beta = rho * dot(y, &d);
            for (dj, sj) in d.iter_mut().zip(s) {
                *dj += (alpha[i] - beta) * sj;
            }
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut step = if hist.is_empty() { (1.0 / dot(&d, &d).sqrt()).min(1.0) } else { 1.0 };

        let mut accepted = false;
        let mut f_new = fx;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            f_new = f(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if hist.is_empty() {
                // no descent possible at working precision
                residual = 0.0;
                break;
            }
            hist.clear();
            continue;
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if hist.len() == cfg.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        residual = (fx - f_new).abs();
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        fx = f_new;
        if residual <= cfg.f_tol {
            break;
        }
    }
    if !residual.is_finite() {
        // stopped before taking a step: already at the target or a critical point
        residual = 0.0;
    }
    LbfgsOutcome { converged: residual <= cfg.f_tol || fx <= cfg.f_target, x, f: fx, iterations, residual }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let out = minimize(
            vec![-1.2, 1.0],
            |x, g| {
                let (a, b) = (x[0], x[1]);
                g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
                g[1] = 200.0 * (b - a * a);
                (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
            },
            &LbfgsConfig { f_tol: 1e-20, ..Default::default() },
        );
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6, "{out:?}");
        assert!(out.converged);
    }

    #[test]
    fn quadratic_in_many_dimensions() {
        let out = minimize(
            vec![1.0; 20],
            |x, g| {
                let mut f = 0.0;
                for (i, (xi, gi)) in x.iter().zip(g.iter_mut()).enumerate() {
                    let w = (i + 1) as f64;
                    f += 0.5 * w * xi * xi;
                    *gi = w * xi;
                }
                f
            },
            &LbfgsConfig::default(),
        );
        assert!(out.f < 1e-10 && out.converged);
    }

    #[test]
    fn stops_at_target() {
        let out = minimize(
            vec![3.0],
            |x, g| {
                g[0] = 2.0 * x[0];
                x[0] * x[0]
            },
            &LbfgsConfig { f_target: 1.0, ..Default::default() },
        );
        assert!(out.f <= 1.0 && out.converged);
    }
}
