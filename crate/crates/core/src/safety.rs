//! Neighbourhoods `E_n(α)` of the critical orbit, α-safe points and the
//! covering sums that bound the dimension of `E(α)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{Interval, SmoothMap};

pub const DEFAULT_J_MAX: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ball {
    pub center: f64,
    pub radius: f64,
    /// Orbit time `j` of the centre `f^j(c)`.
    pub j: usize,
    pub critical: f64,
}

/// Truncated `E_n(α) = ∪_{j ≤ j_max} B(f^j(Crit), min{n^{−α}, j^{−α}})`.
///
/// Balls are open. `tail_bound = j_max^{−α}` bounds every radius with
/// `j > j_max`.
#[derive(Debug, Clone, Serialize)]
pub struct SafetyQuery {
    pub alpha: f64,
    pub n: usize,
    pub j_max: usize,
    pub balls: Vec<Ball>,
    pub tail_bound: f64,
    /// Union of the open balls as sorted disjoint open intervals.
    #[serde(skip)]
    union: Vec<(f64, f64)>,
}

pub fn ball_radius(alpha: f64, n: usize, j: usize) -> f64 {
    (n as f64).powf(-alpha).min((j as f64).powf(-alpha))
}

/// Balls around `f^j(c)`, `j = 1..=j_max`, over the fold points `c`.
pub fn safety_balls(map: &SmoothMap, alpha: f64, n: usize, j_max: usize) -> Result<SafetyQuery> {
    if !(alpha > 0.0) || n == 0 || j_max == 0 {
        return Err(Error::arg("safety_balls needs alpha > 0, n >= 1, j_max >= 1"));
    }
    let mut balls = Vec::with_capacity(j_max * map.turning_points().len());
    for &c in map.turning_points() {
        let mut y = c;
        for j in 1..=j_max {
            y = map.apply(y);
            balls.push(Ball {
                center: y,
                radius: ball_radius(alpha, n, j),
                j,
                critical: c,
            });
        }
    }
    let mut spans: Vec<(f64, f64)> = balls
        .iter()
        .map(|b| (b.center - b.radius, b.center + b.radius))
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut union: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in spans {
        match union.last_mut() {
            // Open intervals that merely touch leave the contact point out.
            Some(last) if lo < last.1 => last.1 = last.1.max(hi),
            _ => union.push((lo, hi)),
        }
    }
    Ok(SafetyQuery {
        alpha,
        n,
        j_max,
        balls,
        tail_bound: (j_max as f64).powf(-alpha),
        union,
    })
}

impl SafetyQuery {
    /// `x` lies outside every truncated ball.
    pub fn is_safe(&self, x: f64) -> bool {
        let i = self.union.partition_point(|s| s.0 < x);
        // Only the interval starting just left of x can contain it.
        i == 0 || self.union[i - 1].1 <= x
    }

    /// `min_j (|x − f^j(c)| − r_j)`: positive for safe points.
    pub fn margin(&self, x: f64) -> f64 {
        self.balls
            .iter()
            .map(|b| (x - b.center).abs() - b.radius)
            .fold(f64::INFINITY, f64::min)
    }

    /// The closure of the union intersected with `[0, 1]`.
    pub fn closed_union(&self) -> Vec<Interval> {
        let mut out: Vec<Interval> = Vec::new();
        for &(lo, hi) in &self.union {
            let iv = Interval {
                lo: lo.max(0.0),
                hi: hi.min(1.0),
            };
            if iv.lo > iv.hi {
                continue;
            }
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        out
    }
}

/// `x ∉ E_n(α)` at truncation `j_max`.
pub fn is_alpha_safe(map: &SmoothMap, x: f64, alpha: f64, n: usize, j_max: usize) -> Result<bool> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(x));
    }
    Ok(safety_balls(map, alpha, n, j_max)?.is_safe(x))
}

/// One α-safe point per cell of width `≤ η`: the cell centre when safe,
/// otherwise the nearest safe point of a 64-point perturbation grid.
pub fn safe_dense_set(
    map: &SmoothMap,
    alpha: f64,
    n: usize,
    eta: f64,
    j_max: usize,
) -> Result<Vec<f64>> {
    if !(eta > 0.0) {
        return Err(Error::arg(format!("eta = {eta} must be positive")));
    }
    let query = safety_balls(map, alpha, n, j_max)?;
    let cells = (1.0 / eta).ceil().max(1.0) as usize;
    let w = 1.0 / cells as f64;
    const SUB: usize = 64;
    let mut out = Vec::with_capacity(cells);
    for k in 0..cells {
        let (lo, hi) = (k as f64 * w, ((k + 1) as f64 * w).min(1.0));
        let c = 0.5 * (lo + hi);
        let step = w / (2.0 * (SUB + 1) as f64);
        let found = std::iter::once(c)
            .chain((1..=SUB).flat_map(|i| [c - i as f64 * step, c + i as f64 * step]))
            .find(|&x| query.is_safe(x));
        match found {
            Some(x) => out.push(x),
            None => return Err(Error::NoSafePointInCell { lo, hi }),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveringSum {
    pub truncated: f64,
    pub tail_bound: f64,
    pub total: f64,
    /// `αβ ≤ 1`: the tail is not summable and `total` is `+∞`.
    pub divergent: bool,
}

/// `Σ_c Σ_{j ≥ 1} |B(f^j(c), min{n^{−α}, j^{−α}})|^β`, summed exactly for
/// `j ≤ j_max` with an integral bound on the rest.
pub fn covering_sum(
    map: &SmoothMap,
    alpha: f64,
    beta: f64,
    n: usize,
    j_max: usize,
) -> Result<CoveringSum> {
    if !(beta > 0.0) || !(alpha > 0.0) || n == 0 || j_max == 0 {
        return Err(Error::arg("covering_sum needs alpha, beta > 0 and n, j_max >= 1"));
    }
    let crit = map.turning_points().len() as f64;
    let terms: Vec<f64> = (1..=j_max)
        .map(|j| (2.0 * ball_radius(alpha, n, j)).powf(beta))
        .collect();
    let truncated = crit * crate::numeric::pairwise_sum(&terms);
    let ab = alpha * beta;
    let divergent = ab <= 1.0;
    let tail_bound = if divergent {
        f64::INFINITY
    } else {
        // Terms j_max < j ≤ n have radius n^{−α}; beyond that the radius is
        // j^{−α} and Σ_{j>J} j^{−αβ} ≤ J^{1−αβ}/(αβ − 1).
        let flat = n.saturating_sub(j_max) as f64 * (2.0 * (n as f64).powf(-alpha)).powf(beta);
        let start = j_max.max(n) as f64;
        crit * (flat + 2f64.powf(beta) * start.powf(1.0 - ab) / (ab - 1.0))
    };
    Ok(CoveringSum {
        truncated,
        tail_bound,
        total: truncated + tail_bound,
        divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_e10() {
        let f = SmoothMap::chebyshev();
        let q = safety_balls(&f, 2.0, 10, 50).unwrap();
        let u = q.closed_union();
        assert_eq!(u.len(), 2);
        assert!(u[0].lo == 0.0 && (u[0].hi - 0.01).abs() < 1e-12);
        assert!((u[1].lo - 0.99).abs() < 1e-12 && u[1].hi == 1.0);
    }

    #[test]
    fn single_unit_ball() {
        let f = SmoothMap::chebyshev();
        let q = safety_balls(&f, 1.0, 1, 1).unwrap();
        assert_eq!(q.balls.len(), 1);
        assert_eq!(q.balls[0].center, 1.0);
        assert_eq!(q.balls[0].radius, 1.0);
        assert_eq!(q.closed_union(), vec![Interval::UNIT]);
    }

    #[test]
    fn radii_and_tail() {
        let f = SmoothMap::quadratic(3.8).unwrap();
        let q = safety_balls(&f, 2.0, 100, 10).unwrap();
        assert!(q.balls.iter().all(|b| b.radius <= 1e-4 + 1e-18));
        assert!((q.tail_bound - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn safety_examples() {
        let f = SmoothMap::chebyshev();
        assert!(is_alpha_safe(&f, 0.3, 2.0, 10, 50).unwrap());
        assert!(!is_alpha_safe(&f, 0.995, 2.0, 10, 50).unwrap());
        assert!(is_alpha_safe(&f, 1.5, 2.0, 10, 50).is_err());
        let q = safety_balls(&f, 2.0, 10, 50).unwrap();
        assert!(q.margin(0.3) > 0.0 && q.margin(0.995) < 0.0);
    }

    #[test]
    fn dense_sets() {
        let f = SmoothMap::chebyshev();
        let s = safe_dense_set(&f, 2.0, 10, 0.1, 100).unwrap();
        assert_eq!(s.len(), 10);
        for (k, x) in s.iter().enumerate() {
            assert!((x - (0.05 + 0.1 * k as f64)).abs() < 1e-12);
        }
        assert_eq!(safe_dense_set(&f, 2.0, 10, 2.0, 100).unwrap(), vec![0.5]);
        let g = SmoothMap::quadratic(3.9).unwrap();
        assert!(matches!(
            safe_dense_set(&g, 0.01, 10, 0.1, 200),
            Err(Error::NoSafePointInCell { .. })
        ));
    }

    #[test]
    fn covering_sum_value() {
        let f = SmoothMap::chebyshev();
        let s = covering_sum(&f, 2.0, 1.0, 100, 100_000).unwrap();
        // Oracle: 100 terms of 2·10^{−4} plus 2·Σ_{100<j≤10^5} j^{−2}.
        let direct: f64 = 0.02 + (101..=100_000).map(|j| 2.0 / (j as f64).powi(2)).sum::<f64>();
        assert!((s.truncated - direct).abs() < 1e-12);
        assert!((s.total - 0.0399).abs() < 1e-4);
        assert!(!s.divergent);
        assert!(covering_sum(&f, 0.5, 1.0, 100, 1000).unwrap().divergent);
    }
}
