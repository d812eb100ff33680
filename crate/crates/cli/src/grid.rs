//! Parameter grids `a:b:n` with angle expressions such as `pi/4` or `3pi/8`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self, String> {
        if points < 2 {
            return Err(format!("grid needs at least 2 points, got {points}"));
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err("grid ends must be finite".into());
        }
        Ok(Self { start, stop, points })
    }

    /// `[0, pi/2]` with 97 points, which hits `pi/4` exactly.
    pub fn default_angle() -> Self {
        Self { start: 0.0, stop: PI / 2.0, points: 97 }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            return self.stop;
        }
        let t = i as f64 / (self.points - 1) as f64;
        self.start + (self.stop - self.start) * t
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("grid must look like start:stop:points, got `{s}`"));
        };
        let n = n.trim().parse().map_err(|_| format!("bad point count `{n}`"))?;
        Grid::new(parse_angle(a)?, parse_angle(b)?, n)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.points)
    }
}

/// Parses a number, optionally as a multiple of pi: `0.3`, `pi`, `-pi/4`, `3pi/8`, `0.5*pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let bad = || format!("cannot parse angle `{s}`");
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s, 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            let k = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            k * PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 || !value.is_finite() {
        return Err(bad());
    }
    Ok(value / den)
}
