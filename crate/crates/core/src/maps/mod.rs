//! Interval maps, observables, Birkhoff sums and empirical measures.

mod interval;
mod observable;
mod smooth;

pub use interval::Interval;
pub use observable::{Observable, ObservableSpec};
pub use smooth::{CriticalPoint, Lap, MapSpec, SmoothMap};

use serde::Serialize;

use crate::error::{Error, Result};

/// `S_nφ(x) = Σ_{i<n} φ(f^i x)`.
pub fn birkhoff_sum(map: &SmoothMap, phi: &Observable, x: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("birkhoff_sum needs n >= 1"));
    }
    map.eval(x)?;
    Ok(birkhoff_unchecked(map, phi, x, n))
}

#[inline]
pub(crate) fn birkhoff_unchecked(map: &SmoothMap, phi: &Observable, x: f64, n: usize) -> f64 {
    let mut y = x;
    let mut s = 0.0;
    for _ in 0..n {
        s += phi.eval(y);
        y = map.apply(y);
    }
    s
}

/// A finite probability measure on `[0, 1]` given by weighted atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    /// `(point, weight)`, sorted by point, equal points merged.
    pub atoms: Vec<(f64, f64)>,
    pub n: usize,
}

/// Atoms closer than this are merged into one.
const MERGE_TOL: f64 = 1e-12;

impl EmpiricalMeasure {
    pub fn from_points(points: &[f64]) -> Self {
        let mut pts = points.to_vec();
        pts.sort_by(f64::total_cmp);
        let mut counts: Vec<(f64, usize)> = Vec::new();
        for p in pts {
            match counts.last_mut() {
                Some((q, k)) if (p - *q).abs() <= MERGE_TOL => *k += 1,
                _ => counts.push((p, 1)),
            }
        }
        let n = points.len();
        let atoms = counts
            .into_iter()
            .map(|(p, k)| (p, k as f64 / n as f64))
            .collect();
        Self { atoms, n }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn integrate(&self, phi: &Observable) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * phi.eval(x)).sum()
    }

    /// `∫ x^k dμ` for `k = 1..=count`.
    pub fn moments(&self, count: usize) -> Vec<f64> {
        (1..=count)
            .map(|k| self.atoms.iter().map(|&(x, w)| w * x.powi(k as i32)).sum())
            .collect()
    }

    /// Mass per uniform bin of `[0, 1]`; the point 1 falls in the last bin.
    pub fn histogram(&self, bins: usize) -> Vec<f64> {
        let mut h = vec![0.0; bins];
        for &(x, w) in &self.atoms {
            let i = ((x * bins as f64) as usize).min(bins - 1);
            h[i] += w;
        }
        h
    }
}

/// `δ_x^n = (1/n) Σ_{i<n} δ_{f^i x}`.
pub fn empirical_measure(map: &SmoothMap, x: f64, n: usize) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::arg("empirical_measure needs n >= 1"));
    }
    map.eval(x)?;
    let mut pts = Vec::with_capacity(n);
    let mut y = x;
    for _ in 0..n {
        pts.push(y);
        y = map.apply(y);
    }
    Ok(EmpiricalMeasure::from_points(&pts))
}
