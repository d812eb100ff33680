//! Streaming moments, block-parallel Monte Carlo and rank correlation.

use crate::par;
use crate::rng::{self, Rng};

/// Number of samples drawn from one RNG stream.
pub const BLOCK: usize = 1024;

/// Running central moments up to fourth order, mergeable in any split.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let d4 = d2 * d2;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3 + other.m3 + d3 * na * nb * (na - nb) / (n * n) + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        Moments { n: self.n + other.n, mean, m2, m3, m4 }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n as f64 - 1.0)).max(0.0)
    }

    /// Population (biased) variance, i.e. <x^2> - <x>^2.
    pub fn population_variance(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.m2 / self.n as f64).max(0.0)
    }

    /// Standard error of the mean.
    pub fn mean_se(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    /// Large-sample standard error of the sample variance.
    pub fn variance_se(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let mu2 = self.m2 / n;
        let mu4 = self.m4 / n;
        ((mu4 - mu2 * mu2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }
}

/// Draws `samples` observations of `k` statistics and accumulates their moments.
///
/// Samples are drawn in blocks of [`BLOCK`], block `b` from stream `(seed, b)`;
/// block results are merged in block order.
pub fn monte_carlo<F>(samples: usize, seed: u64, k: usize, draw: F) -> Vec<Moments>
where
    F: Fn(&mut Rng, &mut [f64]) + Sync + Send,
{
    let blocks = samples.div_ceil(BLOCK);
    let partial = par::map_indexed(blocks, |b| {
        let mut rng = rng::stream(seed, b as u64);
        let count = BLOCK.min(samples - b * BLOCK);
        let mut acc = vec![Moments::default(); k];
        let mut buf = vec![0.0; k];
        for _ in 0..count {
            draw(&mut rng, &mut buf);
            for (m, &x) in acc.iter_mut().zip(&buf) {
                m.push(x);
            }
        }
        acc
    });
    partial.iter().fold(vec![Moments::default(); k], |acc, block| acc.iter().zip(block).map(|(a, b)| a.merge(b)).collect())
}

/// Single-statistic convenience wrapper around [`monte_carlo`].
pub fn monte_carlo_scalar<F>(samples: usize, seed: u64, draw: F) -> Moments
where
    F: Fn(&mut Rng) -> f64 + Sync + Send,
{
    monte_carlo(samples, seed, 1, |rng, out| out[0] = draw(rng))[0]
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation (ties get average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    pearson(&ranks(x), &ranks(y))
}
