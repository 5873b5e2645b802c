use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::Interval;

/// Tolerance on the discrete second differences of Λ.
pub const CONVEXITY_TOL: f64 = 1e-8;
pub const DEFAULT_T_POINTS: usize = 401;

/// Sampled `Λ(θ)` and its discrete Legendre transform `q_φ`.
#[derive(Debug, Clone, Serialize)]
pub struct RateTable {
    pub theta: Vec<f64>,
    /// Λ after replacing it by its lower convex hull.
    pub lambda: Vec<f64>,
    pub lambda_raw: Vec<f64>,
    /// Grid of `t` spanning the extreme hull slopes.
    pub t: Vec<f64>,
    pub q: Vec<f64>,
    /// Range outside which `q = +∞`. Unbounded until set with
    /// [`RateTable::with_range`].
    pub c_phi: f64,
    pub d_phi: f64,
}

/// Indices of the lower convex hull of points sorted by `x`.
pub fn lower_hull(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            // Drop b if it lies on or above the chord from a to i.
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

/// `g*(s) = max_i (s·x_i − y_i)` at each `s`.
pub fn conjugate(xs: &[f64], ys: &[f64], at: &[f64]) -> Vec<f64> {
    at.iter()
        .map(|&s| {
            xs.iter()
                .zip(ys)
                .map(|(x, y)| s * x - y)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

fn hull_values(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let h = lower_hull(xs, ys);
    let mut seg = 0;
    (0..xs.len())
        .map(|i| {
            while seg + 2 < h.len() && h[seg + 1] <= i {
                seg += 1;
            }
            let (a, b) = (h[seg], h[seg + 1]);
            if i == a || i == b {
                return ys[i];
            }
            let w = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            ys[a] + w * (ys[b] - ys[a])
        })
        .collect()
}

pub fn legendre_rate(theta: &[f64], lambda: &[f64]) -> Result<RateTable> {
    legendre_rate_with(theta, lambda, DEFAULT_T_POINTS)
}

pub fn legendre_rate_with(theta: &[f64], lambda: &[f64], t_points: usize) -> Result<RateTable> {
    if theta.len() != lambda.len() || theta.len() < 3 {
        return Err(Error::arg("legendre_rate needs at least 3 matching samples"));
    }
    if theta.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::arg("theta grid must be strictly increasing"));
    }
    if lambda.iter().any(|v| !v.is_finite()) {
        return Err(Error::IllConditioned("Λ has non-finite samples".into()));
    }
    for k in 1..theta.len() - 1 {
        let left = (lambda[k] - lambda[k - 1]) / (theta[k] - theta[k - 1]);
        let right = (lambda[k + 1] - lambda[k]) / (theta[k + 1] - theta[k]);
        let second = (right - left) * 0.5 * (theta[k + 1] - theta[k - 1]);
        if second < -CONVEXITY_TOL {
            return Err(Error::IllConditioned(format!(
                "Λ is not convex at θ = {}: second difference {second:.3e}",
                theta[k]
            )));
        }
    }
    let hull = hull_values(theta, lambda);
    let last = theta.len() - 1;
    let s_lo = (hull[1] - hull[0]) / (theta[1] - theta[0]);
    let s_hi = (hull[last] - hull[last - 1]) / (theta[last] - theta[last - 1]);
    let t: Vec<f64> = if s_hi > s_lo {
        Interval::span(s_lo, s_hi)?.linspace(t_points.max(2)).collect()
    } else {
        vec![s_lo]
    };
    let q = conjugate(theta, &hull, &t);
    Ok(RateTable {
        theta: theta.to_vec(),
        lambda: hull,
        lambda_raw: lambda.to_vec(),
        t,
        q,
        c_phi: f64::NEG_INFINITY,
        d_phi: f64::INFINITY,
    })
}

impl RateTable {
    pub fn with_range(mut self, c_phi: f64, d_phi: f64) -> Self {
        self.c_phi = c_phi;
        self.d_phi = d_phi;
        self
    }

    /// `q_φ(t)`: `+∞` outside `[c_φ, d_φ]`, otherwise the discrete
    /// transform evaluated at `t` itself.
    pub fn rate(&self, t: f64) -> f64 {
        if t < self.c_phi || t > self.d_phi {
            return f64::INFINITY;
        }
        conjugate(&self.theta, &self.lambda, &[t])[0]
    }

    /// Discrete `Λ'(0)`: the mean of the hull slopes on either side of 0.
    pub fn mean(&self) -> f64 {
        let th = &self.theta;
        let k = th.partition_point(|&x| x < 0.0);
        let slope = |i: usize| (self.lambda[i + 1] - self.lambda[i]) / (th[i + 1] - th[i]);
        let last = th.len() - 1;
        if k < th.len() && th[k] == 0.0 {
            match k {
                0 => slope(0),
                _ if k == last => slope(last - 1),
                _ => 0.5 * (slope(k - 1) + slope(k)),
            }
        } else {
            slope(k.clamp(1, last) - 1)
        }
    }

    /// `inf_{t ∈ J} q_φ(t)`. `q_φ` is convex with minimum at the mean, so
    /// the infimum sits at the point of `J ∩ [c_φ, d_φ]` closest to it.
    pub fn inf_over(&self, j: &Interval) -> f64 {
        let lo = j.lo.max(self.c_phi);
        let hi = j.hi.min(self.d_phi);
        if lo > hi {
            return f64::INFINITY;
        }
        self.rate(self.mean().clamp(lo, hi))
    }

    /// Writes `theta,Lambda` rows.
    pub fn write_lambda_csv<W: Write>(&self, out: W) -> Result<()> {
        write_pairs(out, ["theta", "Lambda"], &self.theta, &self.lambda)
    }

    /// Writes `t,q` rows.
    pub fn write_rate_csv<W: Write>(&self, out: W) -> Result<()> {
        write_pairs(out, ["t", "q"], &self.t, &self.q)
    }
}

pub(crate) fn write_pairs<W: Write>(out: W, header: [&str; 2], xs: &[f64], ys: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for (x, y) in xs.iter().zip(ys) {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
