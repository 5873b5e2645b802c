use serde::Serialize;

use super::{MeasureStats, Support};
use crate::error::{Error, Result};
use crate::maps::{birkhoff_unchecked, Observable, SmoothMap};
use crate::numeric::{bisect_root, log_sum_exp};
use crate::pullback::{visit_laps_in, IterateLap, DEFAULT_CAP};
use crate::Interval;

/// Roots closer than this are the same periodic point. Genuine duplicates
/// come from shared lap or segment endpoints and are bit-identical; distinct
/// fixed points of `f^16` near 0 and 1 can be `1e−13` apart.
const DEDUP_TOL: f64 = 1e-15;

/// All fixed points of `f^n` in `[0, 1]`, sorted.
pub fn periodic_points(map: &SmoothMap, n: usize) -> Result<Vec<f64>> {
    periodic_points_capped(map, n, DEFAULT_CAP)
}

pub fn periodic_points_capped(map: &SmoothMap, n: usize, cap: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::arg("periodic_points needs n >= 1"));
    }
    let mut roots = Vec::new();
    visit_laps_in(map, &Interval::UNIT, n, cap, &mut |lap: &IterateLap| {
        lap_fixed_points(map, n, lap, &mut roots);
    })?;
    roots.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        if out.last().map_or(true, |&q| r - q > DEDUP_TOL) {
            out.push(r);
        }
    }
    Ok(out)
}

fn lap_fixed_points(map: &SmoothMap, n: usize, lap: &IterateLap, out: &mut Vec<f64>) {
    let (a, b) = (lap.domain.lo, lap.domain.hi);
    if lap.image.hi < a || lap.image.lo > b {
        return;
    }
    // Endpoint values come from the lap image, which is exact.
    let (fa, fb) = if lap.increasing {
        (lap.image.lo, lap.image.hi)
    } else {
        (lap.image.hi, lap.image.lo)
    };
    let g = |x: f64| {
        if x == a {
            fa - a
        } else if x == b {
            fb - b
        } else {
            map.iterate(x, n) - x
        }
    };
    // f^n − id is strictly decreasing on decreasing laps. On increasing laps
    // it can turn, so a few interior samples bracket every root.
    let segments = if lap.increasing { 8 } else { 1 };
    let xs: Vec<f64> = (0..=segments)
        .map(|k| {
            if k == segments {
                b
            } else {
                a + (b - a) * k as f64 / segments as f64
            }
        })
        .collect();
    for w in xs.windows(2) {
        if let Some(r) = bisect_root(g, w[0], w[1]) {
            out.push(r);
        }
    }
}

/// A periodic orbit listed from its smallest point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    pub period: usize,
    /// `p, f(p), …, f^{period−1}(p)` with `p` the smallest orbit point.
    pub points: Vec<f64>,
}

/// Orbits of minimal period exactly `n`.
///
/// Orbit points are matched to the nearest root of `f^n = id`, which is
/// reliable where a fixed tolerance is not: roots near 0 cluster far below
/// any tolerance that also absorbs the forward error of iteration.
pub fn periodic_orbits(map: &SmoothMap, n: usize) -> Result<Vec<PeriodicOrbit>> {
    let pts = periodic_points(map, n)?;
    let nearest = |x: f64| {
        let i = pts.partition_point(|&p| p < x);
        match (i.checked_sub(1), pts.get(i)) {
            (Some(l), Some(&r)) if x - pts[l] <= r - x => l,
            (_, Some(_)) => i,
            (Some(l), None) => l,
            (None, None) => unreachable!("f^n has at least one fixed point"),
        }
    };
    let mut seen = vec![false; pts.len()];
    let mut out = Vec::new();
    for i in 0..pts.len() {
        if seen[i] {
            continue;
        }
        let mut idx = vec![i];
        let mut y = pts[i];
        for _ in 0..n {
            y = map.apply(y);
            idx.push(nearest(y));
        }
        let minimal = (1..=n).find(|&d| n % d == 0 && idx[d] == i).unwrap_or(n);
        for &k in &idx {
            seen[k] = true;
        }
        if minimal == n {
            out.push(PeriodicOrbit {
                period: n,
                points: idx[..n].iter().map(|&k| pts[k]).collect(),
            });
        }
    }
    Ok(out)
}

/// Statistics of the measure equidistributed on the orbit of `p`.
pub fn measure_stats_periodic(map: &SmoothMap, p: f64, period: usize) -> Result<MeasureStats> {
    if period == 0 {
        return Err(Error::arg("period must be >= 1"));
    }
    map.eval(p)?;
    let back = map.iterate(p, period);
    if (back - p).abs() > 1e-8 {
        return Err(Error::arg(format!(
            "f^{period}({p}) = {back} is not p"
        )));
    }
    let lyapunov = map.log_abs_deriv_iter(p, period) / period as f64;
    let orbit: Vec<f64> = (0..period).scan(p, |y, _| {
        let cur = *y;
        *y = map.apply(cur);
        Some(cur)
    })
    .collect();
    Ok(MeasureStats {
        lyapunov,
        entropy: 0.0,
        free_energy: -lyapunov,
        support: Support::PeriodicOrbit { points: orbit },
    })
}

/// `(1/n) log Σ_{f^n p = p} exp(S_nψ(p))`.
pub fn pressure_periodic(map: &SmoothMap, psi: &Observable, n: usize) -> Result<f64> {
    let pts = periodic_points(map, n)?;
    let sums: Vec<f64> = pts.iter().map(|&p| birkhoff_unchecked(map, psi, p, n)).collect();
    Ok(log_sum_exp(&sums) / n as f64)
}

/// Extremes of periodic-orbit averages, an inner approximation of
/// `[c_φ, d_φ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableRange {
    pub c_lo: f64,
    pub d_hi: f64,
    /// `(point, period)` attaining each extreme.
    pub argmin: (f64, usize),
    pub argmax: (f64, usize),
}

pub fn observable_range(map: &SmoothMap, phi: &Observable, max_period: usize) -> Result<ObservableRange> {
    if max_period == 0 {
        return Err(Error::arg("max_period must be >= 1"));
    }
    let mut r = ObservableRange {
        c_lo: f64::INFINITY,
        d_hi: f64::NEG_INFINITY,
        argmin: (f64::NAN, 0),
        argmax: (f64::NAN, 0),
    };
    for n in 1..=max_period {
        for p in periodic_points(map, n)? {
            let avg = birkhoff_unchecked(map, phi, p, n) / n as f64;
            if avg < r.c_lo {
                r.c_lo = avg;
                r.argmin = (p, n);
            }
            if avg > r.d_hi {
                r.d_hi = avg;
                r.argmax = (p, n);
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_period_points() {
        let f = SmoothMap::chebyshev();
        assert_eq!(periodic_points(&f, 1).unwrap(), vec![0.0, 0.75]);
        let p2 = periodic_points(&f, 2).unwrap();
        let s5 = 5f64.sqrt();
        let expect = [0.0, (5.0 - s5) / 8.0, 0.75, (5.0 + s5) / 8.0];
        assert_eq!(p2.len(), 4);
        for (a, b) in p2.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn counts_match_lap_count() {
        let f = SmoothMap::chebyshev();
        for n in 1..=14 {
            assert_eq!(periodic_points(&f, n).unwrap().len(), 1 << n, "n = {n}");
        }
    }

    #[test]
    fn orbits_by_minimal_period() {
        let f = SmoothMap::chebyshev();
        // Necklace counts for the full 2-shift: 2, 1, 2, 3, 6, 9.
        let counts: Vec<usize> = (1..=6).map(|n| periodic_orbits(&f, n).unwrap().len()).collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6, 9]);
        // Every fixed point of f^12 lies on exactly one orbit of period d | 12.
        let total: usize = [1, 2, 3, 4, 6, 12]
            .iter()
            .map(|&d| d * periodic_orbits(&f, d).unwrap().len())
            .sum();
        assert_eq!(total, 1 << 12);
    }

    #[test]
    fn stats_of_fixed_points() {
        let f = SmoothMap::chebyshev();
        let s = measure_stats_periodic(&f, 0.75, 1).unwrap();
        assert!((s.lyapunov - 2f64.ln()).abs() < 1e-15);
        assert!((s.free_energy + 2f64.ln()).abs() < 1e-15);
        let s = measure_stats_periodic(&f, 0.0, 1).unwrap();
        assert!((s.lyapunov - 4f64.ln()).abs() < 1e-15);
        assert!(measure_stats_periodic(&f, 0.3, 1).is_err());
        let p = (5.0 - 5f64.sqrt()) / 8.0;
        let s = measure_stats_periodic(&f, p, 2).unwrap();
        let direct = 0.5 * (f.df(p) * f.df(f.apply(p))).abs().ln();
        assert!((s.lyapunov - direct).abs() < 1e-12);
    }

    #[test]
    fn topological_pressure() {
        let f = SmoothMap::chebyshev();
        let p = pressure_periodic(&f, &Observable::Zero, 10).unwrap();
        assert!((p - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn identity_range() {
        let f = SmoothMap::chebyshev();
        let r = observable_range(&f, &Observable::Identity, 6).unwrap();
        assert_eq!(r.c_lo, 0.0);
        assert!((r.d_hi - 0.75).abs() < 1e-12);
    }
}
