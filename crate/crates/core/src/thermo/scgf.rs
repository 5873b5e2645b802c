use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ulam::{ulam_operator, DEFAULT_BINS};
use crate::error::{Error, Result};
use crate::maps::{birkhoff_unchecked, Observable, SmoothMap};
use crate::numeric::log_sum_exp;

/// Estimator of `Λ(θ) = lim (1/n) log ∫ e^{θ S_nφ} dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum ScgfMethod {
    /// Midpoint rule over `samples` equispaced initial points. With `jitter`
    /// each point is drawn uniformly inside its cell from a seeded stream.
    GridMc {
        n: usize,
        samples: usize,
        #[serde(default)]
        jitter: Option<u64>,
    },
    /// `P(θφ − log|Df|)` from the weighted Ulam operator.
    UlamPressure { bins: usize },
}

impl ScgfMethod {
    pub fn grid(n: usize, samples: usize) -> Self {
        ScgfMethod::GridMc {
            n,
            samples,
            jitter: None,
        }
    }

    pub fn ulam() -> Self {
        ScgfMethod::UlamPressure { bins: DEFAULT_BINS }
    }
}

/// The 201-point grid on `[−8, 8]`.
pub fn default_theta_grid() -> Vec<f64> {
    theta_grid(8.0, 201)
}

/// `count` points spaced evenly on `[−half_width, half_width]`, symmetric
/// to the last bit.
pub fn theta_grid(half_width: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|k| {
            let i = 2 * k as i64 - (count as i64 - 1);
            half_width * i as f64 / (count as f64 - 1.0)
        })
        .collect()
}

pub fn scgf(map: &SmoothMap, phi: &Observable, theta: f64, method: &ScgfMethod) -> Result<f64> {
    Ok(scgf_curve(map, phi, &[theta], method)?[0])
}

/// `Λ` on a grid of θ. Grid-MC computes the Birkhoff sums once and reuses
/// them for every θ; the Ulam route warm-starts each eigenvector from the
/// previous θ.
pub fn scgf_curve(
    map: &SmoothMap,
    phi: &Observable,
    thetas: &[f64],
    method: &ScgfMethod,
) -> Result<Vec<f64>> {
    match *method {
        ScgfMethod::GridMc { n, samples, jitter } => {
            let sums = grid_sums(map, phi, n, samples, jitter)?;
            Ok(thetas.iter().map(|&t| lambda_from_sums(&sums, t, n)).collect())
        }
        ScgfMethod::UlamPressure { bins } => {
            let base = ulam_operator(map, bins, &Observable::Zero)?;
            let mut out = Vec::with_capacity(thetas.len());
            let mut warm: Option<Vec<f64>> = None;
            for &t in thetas {
                // P(θφ − log|Df|) uses the multiplier e^{θφ}; see pressure_ulam.
                let op = base.reweighted(&phi.scaled(t));
                let eig = op.leading_eigen(warm.as_deref())?;
                out.push(eig.value.ln());
                warm = Some(eig.vector);
            }
            Ok(out)
        }
    }
}

/// `S_nφ(x_i)` over the sample grid, in grid order.
pub fn grid_sums(
    map: &SmoothMap,
    phi: &Observable,
    n: usize,
    samples: usize,
    jitter: Option<u64>,
) -> Result<Vec<f64>> {
    if n == 0 || samples == 0 {
        return Err(Error::arg("grid-mc needs n >= 1 and samples >= 1"));
    }
    let h = 1.0 / samples as f64;
    let offsets: Vec<f64> = match jitter {
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples).map(|_| rng.gen::<f64>()).collect()
        }
        None => vec![0.5; samples],
    };
    Ok(offsets
        .par_iter()
        .enumerate()
        .map(|(i, u)| birkhoff_unchecked(map, phi, (i as f64 + u) * h, n))
        .collect())
}

/// `(1/n) log((1/N) Σ e^{θ S_i})`; exactly 0 at θ = 0.
pub fn lambda_from_sums(sums: &[f64], theta: f64, n: usize) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let v: Vec<f64> = sums.iter().map(|s| theta * s).collect();
    (log_sum_exp(&v) - (sums.len() as f64).ln()) / n as f64
}
