use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{MeasureStats, Support};
use crate::error::{Error, Result};
use crate::maps::{Interval, Observable, SmoothMap};
use crate::numeric::pairwise_sum;
use crate::pullback::{visit_laps_in, IterateLap, DEFAULT_CAP};

pub const DEFAULT_BINS: usize = 4096;
/// Relative eigenvalue tolerance of the power iteration.
pub const EIGEN_TOL: f64 = 1e-12;
pub const MAX_POWER_STEPS: usize = 100_000;
/// Block length of the entropy estimate in [`measure_stats_ulam`].
pub const ENTROPY_BLOCK: usize = 8;

/// Sparse rows of `|f^{-k}(bin_j) ∩ bin_i| / |bin_i|`.
type Rows = Vec<Vec<(u32, f64)>>;

/// Ulam discretisation of the transfer operator with multiplier `e^{ψ}`.
///
/// Entry `(i → j)` is `|f^{-1}(bin_j) ∩ bin_i| / |bin_i| · e^{ψ(m_i)}` with
/// `m_i` the midpoint of bin `i`.
#[derive(Debug, Clone)]
pub struct UlamOperator {
    map: SmoothMap,
    bins: usize,
    rows: Arc<Rows>,
    weights: Vec<f64>,
    potential: Observable,
}

/// Bin `i` of `bins` equal bins, with exact endpoints at 0 and 1.
fn bin(i: usize, bins: usize) -> Interval {
    let hi = if i + 1 == bins {
        1.0
    } else {
        (i + 1) as f64 / bins as f64
    };
    Interval {
        lo: i as f64 / bins as f64,
        hi,
    }
}

pub fn bin_midpoint(i: usize, bins: usize) -> f64 {
    (i as f64 + 0.5) / bins as f64
}

/// Preimage lengths of every bin inside `bin_i` under `f^k`, divided by
/// `|bin_i|`. Measured lap by lap through the itinerary inverses.
fn transition_row(map: &SmoothMap, i: usize, bins: usize, k: usize) -> Result<Vec<(u32, f64)>> {
    let b = bin(i, bins);
    let width = b.len();
    let mut acc: Vec<(u32, f64)> = Vec::new();
    visit_laps_in(map, &b, k, DEFAULT_CAP, &mut |lap: &IterateLap| {
        let img = lap.image;
        let first = ((img.lo * bins as f64).floor() as usize).min(bins - 1);
        let last = ((img.hi * bins as f64).ceil() as usize).clamp(first + 1, bins);
        for j in first..last {
            let lo = (j as f64 / bins as f64).max(img.lo);
            let hi = if j + 1 == bins {
                img.hi
            } else {
                ((j + 1) as f64 / bins as f64).min(img.hi)
            };
            if hi < lo {
                continue;
            }
            let len = (lap.inverse(map, hi) - lap.inverse(map, lo)).abs();
            if len > 0.0 {
                acc.push((j as u32, len / width));
            }
        }
    })?;
    acc.sort_by_key(|e| e.0);
    let mut row: Vec<(u32, f64)> = Vec::with_capacity(acc.len());
    for (j, w) in acc {
        match row.last_mut() {
            Some(last) if last.0 == j => last.1 += w,
            _ => row.push((j, w)),
        }
    }
    Ok(row)
}

fn assemble(map: &SmoothMap, bins: usize, k: usize) -> Result<Rows> {
    (0..bins)
        .into_par_iter()
        .map(|i| transition_row(map, i, bins, k))
        .collect()
}

/// `exp(χ(m_i))` per bin. A non-finite value at the midpoint (a critical
/// point sitting there, say) is replaced by the mean over `m_i ± w/4`.
fn bin_weights(chi: &Observable, bins: usize) -> Vec<f64> {
    (0..bins)
        .map(|i| {
            let m = bin_midpoint(i, bins);
            let mut v = chi.eval(m);
            if !v.is_finite() {
                let d = 0.25 / bins as f64;
                v = 0.5 * (chi.eval(m - d) + chi.eval(m + d));
            }
            v.exp()
        })
        .collect()
}

pub fn ulam_operator(map: &SmoothMap, bins: usize, psi: &Observable) -> Result<UlamOperator> {
    if bins < 2 {
        return Err(Error::arg(format!("bins = {bins} must be at least 2")));
    }
    if bins > u32::MAX as usize {
        return Err(Error::arg("too many bins"));
    }
    let rows = assemble(map, bins, 1)?;
    Ok(UlamOperator {
        map: map.clone(),
        bins,
        rows: Arc::new(rows),
        weights: bin_weights(psi, bins),
        potential: psi.clone(),
    })
}

/// Result of a power iteration: the leading eigenvalue and its
/// nonnegative left eigenvector normalised to total mass 1.
#[derive(Debug, Clone)]
pub struct LeadingEigen {
    pub value: f64,
    pub vector: Vec<f64>,
    pub steps: usize,
}

impl UlamOperator {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn potential(&self) -> &Observable {
        &self.potential
    }

    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    pub fn is_unweighted(&self) -> bool {
        matches!(self.potential, Observable::Zero)
    }

    /// Nonzero entries `(j, weight)` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let w = self.weights[i];
        self.rows[i].iter().map(move |&(j, p)| (j as usize, p * w))
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|e| e.1).sum()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// The same bins and lap geometry with a different multiplier.
    pub fn reweighted(&self, psi: &Observable) -> UlamOperator {
        UlamOperator {
            map: self.map.clone(),
            bins: self.bins,
            rows: Arc::clone(&self.rows),
            weights: bin_weights(psi, self.bins),
            potential: psi.clone(),
        }
    }

    /// `v ↦ v·L` on row vectors of bin masses.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.bins];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            let s = vi * self.weights[i];
            for &(j, p) in &self.rows[i] {
                out[j as usize] += s * p;
            }
        }
        out
    }

    /// Power iteration from `start` (uniform if `None`). Stops when the
    /// growth factor is stable to [`EIGEN_TOL`] relative and the
    /// normalised vector moves by at most `1e−10` in L1.
    pub fn leading_eigen(&self, start: Option<&[f64]>) -> Result<LeadingEigen> {
        let b = self.bins;
        let mut v: Vec<f64> = match start {
            Some(s) if s.len() == b => {
                let t: f64 = s.iter().sum();
                s.iter().map(|x| x / t).collect()
            }
            _ => vec![1.0 / b as f64; b],
        };
        let mut prev = f64::NAN;
        for step in 1..=MAX_POWER_STEPS {
            let w = self.apply(&v);
            let rho = pairwise_sum(&w);
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(Error::Convergence { steps: step });
            }
            let w: Vec<f64> = w.into_iter().map(|x| x / rho).collect();
            let moved: f64 = v.iter().zip(&w).map(|(a, c)| (a - c).abs()).sum();
            let stable = (rho - prev).abs() <= EIGEN_TOL * rho;
            v = w;
            prev = rho;
            if stable && moved <= 1e-10 {
                return Ok(LeadingEigen {
                    value: rho,
                    vector: v,
                    steps: step,
                });
            }
        }
        Err(Error::Convergence {
            steps: MAX_POWER_STEPS,
        })
    }
}

/// Stationary bin masses of the unweighted Ulam chain.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantDensity {
    pub bins: usize,
    /// Mass of each bin; sums to 1.
    pub mass: Vec<f64>,
    pub steps: usize,
    /// `‖πP − π‖₁` at the returned vector.
    pub residual: f64,
}

impl InvariantDensity {
    /// Density value on bin `i`.
    pub fn density(&self, i: usize) -> f64 {
        self.mass[i] * self.bins as f64
    }

    pub fn at(&self, x: f64) -> f64 {
        let i = ((x * self.bins as f64) as usize).min(self.bins - 1);
        self.density(i)
    }

    /// `∫_window |ρ − g|` with `g` integrated by a 5-point Gauss rule per
    /// bin and ρ constant on bins.
    pub fn l1_distance(&self, g: impl Fn(f64) -> f64, window: &Interval) -> f64 {
        const NODES: [f64; 5] = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        let mut parts = Vec::with_capacity(self.bins);
        for i in 0..self.bins {
            let Some(seg) = bin(i, self.bins).intersect(window) else {
                continue;
            };
            let rho = self.density(i);
            let (c, h) = (seg.mid(), 0.5 * seg.len());
            let s: f64 = NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(t, w)| w * (rho - g(c + h * t)).abs())
                .sum();
            parts.push(s * h);
        }
        pairwise_sum(&parts)
    }

    /// Writes `bin_mid,density` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_mid", "density"])?;
        for i in 0..self.bins {
            w.write_record([
                bin_midpoint(i, self.bins).to_string(),
                self.density(i).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn invariant_density(op: &UlamOperator) -> Result<InvariantDensity> {
    if !op.is_unweighted() {
        return Err(Error::Precondition(
            "invariant_density needs the unweighted operator (psi = 0)".into(),
        ));
    }
    let eig = op.leading_eigen(None)?;
    let next = op.apply(&eig.vector);
    let residual = next.iter().zip(&eig.vector).map(|(a, b)| (a - b).abs()).sum();
    Ok(InvariantDensity {
        bins: op.bins,
        mass: eig.vector,
        steps: eig.steps,
        residual,
    })
}

/// `(1/k) Σ_i π_i H(row_i of the k-step chain)`: the entropy of `k`-step
/// bin transitions started from the stationary bin masses.
pub fn block_entropy(op: &UlamOperator, density: &InvariantDensity, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::arg("entropy block length must be >= 1"));
    }
    let rows;
    let rows_ref: &Rows = if k == 1 {
        &op.rows
    } else {
        rows = assemble(&op.map, op.bins, k)?;
        &rows
    };
    let terms: Vec<f64> = rows_ref
        .iter()
        .zip(&density.mass)
        .map(|(row, &pi)| {
            let h: f64 = row
                .iter()
                .filter(|e| e.1 > 0.0)
                .map(|&(_, p)| -p * p.ln())
                .sum();
            pi * h
        })
        .collect();
    Ok(pairwise_sum(&terms) / k as f64)
}

/// Statistics of the Ulam approximation of the acip, with the entropy
/// taken over [`ENTROPY_BLOCK`]-step transitions.
pub fn measure_stats_ulam(op: &UlamOperator) -> Result<MeasureStats> {
    measure_stats_ulam_with(op, ENTROPY_BLOCK)
}

pub fn measure_stats_ulam_with(op: &UlamOperator, block: usize) -> Result<MeasureStats> {
    let density = invariant_density(op)?;
    let logd = bin_weights(&Observable::log_abs_deriv(&op.map), op.bins);
    let terms: Vec<f64> = density
        .mass
        .iter()
        .zip(&logd)
        .map(|(pi, w)| pi * w.ln())
        .collect();
    let lyapunov = pairwise_sum(&terms);
    let entropy = block_entropy(op, &density, block)?;
    Ok(MeasureStats {
        lyapunov,
        entropy,
        free_energy: entropy - lyapunov,
        support: Support::UlamDensity { bins: op.bins },
    })
}

/// `P(ψ)` as the log of the leading eigenvalue of the Ulam operator with
/// multiplier `e^{ψ + log|Df|}`. The Ulam rows carry Lebesgue weights, which
/// already contain the factor `1/|Df|` of the transfer operator.
pub fn pressure_ulam(map: &SmoothMap, psi: &Observable, bins: usize) -> Result<f64> {
    let base = ulam_operator(map, bins, &Observable::Zero)?;
    pressure_on(&base, psi, None).map(|e| e.value.ln())
}

pub(crate) fn pressure_on(
    base: &UlamOperator,
    psi: &Observable,
    warm: Option<&[f64]>,
) -> Result<LeadingEigen> {
    let chi = Observable::Combination(vec![
        (1.0, psi.clone()),
        (1.0, Observable::log_abs_deriv(&base.map)),
    ]);
    base.reweighted(&chi).leading_eigen(warm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arcsine(x: f64) -> f64 {
        1.0 / (std::f64::consts::PI * (x * (1.0 - x)).sqrt())
    }

    #[test]
    fn two_bins() {
        // [0, 1/2] covers [0, 1] once; the part landing in [0, 1/2] is
        // [0, (1 − 1/√2)/2].
        let f = SmoothMap::chebyshev();
        let op = ulam_operator(&f, 2, &Observable::Zero).unwrap();
        let r: Vec<(usize, f64)> = op.row(0).collect();
        let p0 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(r.len(), 2);
        assert!((r[0].1 - p0).abs() < 1e-12 && (r[1].1 - (1.0 - p0)).abs() < 1e-12);
        let t = ulam_operator(&SmoothMap::tent(), 2, &Observable::Zero).unwrap();
        for (_, p) in t.row(0) {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_are_stochastic() {
        for f in [
            SmoothMap::chebyshev(),
            SmoothMap::quadratic(3.7).unwrap(),
            SmoothMap::tent(),
        ] {
            let op = ulam_operator(&f, 257, &Observable::Zero).unwrap();
            for i in 0..op.bins() {
                assert!((op.row_sum(i) - 1.0).abs() < 1e-10, "{} row {i}", f.name());
                assert!(op.row(i).all(|e| e.1 >= 0.0));
            }
        }
    }

    #[test]
    fn multiplier_scales_rows() {
        let f = SmoothMap::chebyshev();
        let op = ulam_operator(&f, 16, &Observable::Identity).unwrap();
        for i in 0..16 {
            assert!((op.row_sum(i) - bin_midpoint(i, 16).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn tent_density_is_uniform() {
        let f = SmoothMap::tent();
        let op = ulam_operator(&f, 256, &Observable::Zero).unwrap();
        let d = invariant_density(&op).unwrap();
        for i in 0..256 {
            assert!((d.density(i) - 1.0).abs() < 1e-9);
        }
        let s = measure_stats_ulam(&op).unwrap();
        assert!((s.lyapunov - 2f64.ln()).abs() < 1e-12);
        assert!((s.entropy - 2f64.ln()).abs() < 1e-12);
        assert!(s.free_energy.abs() < 1e-12);
    }

    #[test]
    fn chebyshev_density() {
        let f = SmoothMap::chebyshev();
        let op = ulam_operator(&f, 1024, &Observable::Zero).unwrap();
        let d = invariant_density(&op).unwrap();
        assert!(d.residual < 1e-8);
        assert!((d.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let l1 = d.l1_distance(arcsine, &Interval::new(0.05, 0.95).unwrap());
        assert!(l1 < 0.02, "L1 = {l1}");
        // Ulam smears the singularity at the repelling fixed point 0 but not
        // the one at the critical value 1, so symmetry is checked away from
        // the ends.
        let asym: f64 = (51..512).map(|i| (d.mass[i] - d.mass[1023 - i]).abs()).sum::<f64>() * 2.0;
        assert!(asym < 0.02, "asym = {asym}");
    }

    #[test]
    fn weighted_operator_needs_psi_zero() {
        let f = SmoothMap::chebyshev();
        let op = ulam_operator(&f, 8, &Observable::Identity).unwrap();
        assert!(matches!(invariant_density(&op), Err(Error::Precondition(_))));
        assert!(ulam_operator(&f, 1, &Observable::Zero).is_err());
    }

    #[test]
    fn pressure_of_zero_and_geometric() {
        let f = SmoothMap::chebyshev();
        let p0 = pressure_ulam(&f, &Observable::Zero, 1024).unwrap();
        assert!((p0 - 2f64.ln()).abs() < 0.02, "P(0) = {p0}");
        let geo = Observable::Zero.tilted_geometric(0.0, &f);
        let p1 = pressure_ulam(&f, &geo, 1024).unwrap();
        assert!(p1.abs() < 1e-9, "P(-log|Df|) = {p1}");
    }
}
