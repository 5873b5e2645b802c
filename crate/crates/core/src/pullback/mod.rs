//! Pull-backs of intervals, distortion and cross-ratio diagnostics, the
//! partition `P_n(η)` and the uniform scale search.

mod laps;
mod partition;
mod ratio;
mod usl;

pub use laps::{iterate_laps, pullbacks_in, visit_laps_in, IterateLap};
pub use partition::{
    partition_in, partition_pn, visit_partition, PartitionCheck, PartitionElement, PartitionPn,
};
pub use ratio::{ratio_growth, RatioGrowth};
pub use usl::{uniform_scale_search, UslCertificate, UslParams, UslResult};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{Interval, SmoothMap};

/// Default cap on the number of components a single call may produce.
pub const DEFAULT_CAP: usize = 1_000_000;

/// Slack for interior-intersection tests between closed components.
pub const INTERIOR_SLACK: f64 = 1e-12;

/// A connected component `W` of `f^{-n}(U)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullBack {
    pub interval: Interval,
    pub time: usize,
    pub target: Interval,
    /// `f^n` maps `interval` diffeomorphically onto `target`.
    pub diffeomorphic: bool,
    /// Measured distortion of `f^n` on `interval`; `None` when not
    /// diffeomorphic or not computed.
    pub distortion: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Piece {
    pub interval: Interval,
    pub onto: bool,
}

/// Joins consecutive lap pieces sharing an endpoint. A joined component
/// contains a fold in its interior, so it is never diffeomorphic.
pub(crate) fn merge_pieces(pieces: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        match out.last_mut() {
            Some(q) if q.interval.hi >= p.interval.lo => {
                q.interval.hi = q.interval.hi.max(p.interval.hi);
                q.onto = false;
            }
            _ => out.push(p),
        }
    }
    out
}

/// Components of `f^{-1}(U)`, ordered left to right.
///
/// A component is diffeomorphic when it sits inside a single lap and the lap
/// covers `U`, so that `f` maps it onto `U`.
pub fn preimage_components(map: &SmoothMap, u: &Interval) -> Result<Vec<PullBack>> {
    if u.lo > u.hi {
        return Err(Error::arg("preimage of an empty interval"));
    }
    Ok(preimage_pieces(map, u)
        .into_iter()
        .map(|p| PullBack {
            interval: p.interval,
            time: 1,
            target: *u,
            diffeomorphic: p.onto,
            distortion: None,
        })
        .collect())
}

fn preimage_pieces(map: &SmoothMap, u: &Interval) -> Vec<Piece> {
    let mut pieces = Vec::with_capacity(map.laps().len());
    for (j, lap) in map.laps().iter().enumerate() {
        let Some(v) = u.intersect(&lap.image) else {
            continue;
        };
        let a = map.inverse_on_lap(j, v.lo);
        let b = map.inverse_on_lap(j, v.hi);
        pieces.push(Piece {
            interval: Interval::hull(a, b),
            onto: lap.image.contains_interval(u, 1e-12),
        });
    }
    merge_pieces(pieces)
}

/// All components of `f^{-n}(U)` with their diffeomorphic flags and measured
/// distortion, sorted left to right.
pub fn pullbacks(map: &SmoothMap, u: &Interval, n: usize) -> Result<Vec<PullBack>> {
    pullbacks_capped(map, u, n, DEFAULT_CAP)
}

pub fn pullbacks_capped(
    map: &SmoothMap,
    u: &Interval,
    n: usize,
    cap: usize,
) -> Result<Vec<PullBack>> {
    let mut out = Vec::new();
    visit_pullbacks(map, u, n, cap, &mut |w: PullBack| out.push(w))?;
    out.sort_by(|a, b| a.interval.lo.total_cmp(&b.interval.lo));
    for w in out.iter_mut().filter(|w| w.diffeomorphic) {
        w.distortion = distortion(map, &w.interval, n, 17).ok();
    }
    Ok(out)
}

/// Streams the components of `f^{-n}(U)` to `visit` without storing the
/// tree. Distortion is left unset. Returns the number of components.
pub fn visit_pullbacks<F: FnMut(PullBack)>(
    map: &SmoothMap,
    u: &Interval,
    n: usize,
    cap: usize,
    visit: &mut F,
) -> Result<usize> {
    if n == 0 {
        return Err(Error::arg("pullbacks need n >= 1"));
    }
    if u.lo > u.hi {
        return Err(Error::arg("pullback of an empty interval"));
    }
    let mut walk = Descent {
        map,
        target: *u,
        n,
        cap,
        count: 0,
    };
    walk.descend(*u, true, n, visit)?;
    Ok(walk.count)
}

struct Descent<'a> {
    map: &'a SmoothMap,
    target: Interval,
    n: usize,
    cap: usize,
    count: usize,
}

impl Descent<'_> {
    fn descend<F: FnMut(PullBack)>(
        &mut self,
        v: Interval,
        diffeo: bool,
        remaining: usize,
        visit: &mut F,
    ) -> Result<()> {
        for p in preimage_pieces(self.map, &v) {
            let d = diffeo && p.onto;
            if remaining > 1 {
                self.descend(p.interval, d, remaining - 1, visit)?;
                continue;
            }
            self.count += 1;
            if self.count > self.cap {
                return Err(Error::Resource {
                    what: "pull-back components",
                    count: self.count,
                    cap: self.cap,
                });
            }
            visit(PullBack {
                interval: p.interval,
                time: self.n,
                target: self.target,
                diffeomorphic: d,
                distortion: None,
            });
        }
        Ok(())
    }
}

/// `f^n(J)`, following folds exactly.
pub fn image_iter(map: &SmoothMap, j: &Interval, n: usize) -> Interval {
    (0..n).fold(*j, |acc, _| map.image(&acc))
}

/// First `x ∈ J` (by iterate) where some `f^i(J)`, `i < n`, has a turning
/// point in its interior; `None` if `f^n` is fold-free on `J`.
pub(crate) fn fold_witness(map: &SmoothMap, j: &Interval, n: usize) -> Option<(usize, f64)> {
    let mut acc = *j;
    for i in 0..n {
        if let Some(&t) = map.turning_points().iter().find(|&&t| acc.contains_interior(t)) {
            return Some((i, t));
        }
        acc = map.image(&acc);
    }
    None
}

/// `sup_{x,y ∈ J} |Df^n(x)| / |Df^n(y)|` over an equispaced sample
/// (endpoints included), doubling the sample until two successive values
/// agree within 1%.
pub fn distortion(map: &SmoothMap, j: &Interval, n: usize, samples: usize) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    let samples = samples.max(3);
    if let Some((i, t)) = fold_witness(map, j, n) {
        // Report the sample nearest to the fold when the fold is at time 0,
        // otherwise a point of J whose iterate lands closest to it.
        let witness = if i == 0 {
            t
        } else {
            j.linspace(1025)
                .min_by(|a, b| {
                    let da = (map.iterate(*a, i) - t).abs();
                    let db = (map.iterate(*b, i) - t).abs();
                    da.total_cmp(&db)
                })
                .unwrap_or(j.mid())
        };
        return Err(Error::NotDiffeomorphic { witness });
    }
    let measure = |s: usize| -> Result<f64> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in j.linspace(s) {
            let l = map.log_abs_deriv_iter(x, n);
            if !l.is_finite() {
                return Err(Error::NotDiffeomorphic { witness: x });
            }
            lo = lo.min(l);
            hi = hi.max(l);
        }
        Ok((hi - lo).exp())
    };
    let mut s = samples;
    let mut d = measure(s)?;
    while s < 1 << 16 {
        s = 2 * s - 1;
        let next = measure(s)?;
        let stable = (next / d - 1.0).abs() <= 0.01;
        d = next;
        if stable {
            break;
        }
    }
    Ok(d)
}

/// `Cr(Ĵ; J) = |Ĵ||J| / (|L||R|)` with `L`, `R` the components of `Ĵ \ J`.
pub fn cross_ratio(jhat: &Interval, j: &Interval) -> Result<f64> {
    if !(jhat.lo < j.lo && j.hi < jhat.hi) || j.lo > j.hi {
        return Err(Error::DegenerateConfiguration(format!(
            "{j} is not compactly contained in {jhat}"
        )));
    }
    let l = j.lo - jhat.lo;
    let r = jhat.hi - j.hi;
    Ok(jhat.len() * j.len() / (l * r))
}

pub const DEFAULT_COVERING_CAP: usize = 200;

/// `N(γ)`: the least `N` with `f^N(J) = [0, 1]` for every sampled `J` of
/// length `γ` (left endpoints on a grid of spacing `1/grid`).
pub fn covering_time(map: &SmoothMap, gamma: f64, grid: usize) -> Result<usize> {
    covering_time_capped(map, gamma, grid, DEFAULT_COVERING_CAP)
}

pub fn covering_time_capped(
    map: &SmoothMap,
    gamma: f64,
    grid: usize,
    cap: usize,
) -> Result<usize> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::arg(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    let grid = grid.max(1);
    let mut worst = 1;
    let mut k = 0;
    loop {
        let a = k as f64 / grid as f64;
        if a + gamma > 1.0 + 1e-15 {
            break;
        }
        let j = Interval {
            lo: a,
            hi: (a + gamma).min(1.0),
        };
        let mut acc = j;
        let mut steps = 0;
        while !(acc.lo <= 1e-9 && acc.hi >= 1.0 - 1e-9) || steps == 0 {
            if steps == cap {
                return Err(Error::NotTopologicallyExact { gamma, cap });
            }
            acc = map.image(&acc);
            steps += 1;
        }
        worst = worst.max(steps);
        k += 1;
    }
    Ok(worst)
}

/// Edges `c0 → c1` labelled by the first time the orbit of `c0` hits `c1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalGraph {
    pub vertices: Vec<f64>,
    pub edges: Vec<(usize, usize, usize)>,
    /// Maximal label sum along a chain of edges.
    pub e: usize,
}

/// Vertices are the fold points of the map (critical points and turning
/// breakpoints).
pub fn critical_graph(map: &SmoothMap, horizon: usize) -> Result<CriticalGraph> {
    if horizon == 0 {
        return Err(Error::arg("critical_graph needs horizon >= 1"));
    }
    let vertices = map.turning_points().to_vec();
    let mut edges = Vec::new();
    let mut next: Vec<Option<(usize, usize)>> = vec![None; vertices.len()];
    for (i, &c) in vertices.iter().enumerate() {
        let mut y = c;
        for step in 1..=horizon {
            y = map.apply(y);
            if let Some(j) = vertices.iter().position(|&v| (v - y).abs() <= 1e-10) {
                if j == i {
                    return Err(Error::UnsupportedMap(format!(
                        "critical point {c} is periodic with period {step}"
                    )));
                }
                edges.push((i, j, step));
                next[i] = Some((j, step));
                break;
            }
        }
    }
    let mut e = 0;
    for start in 0..vertices.len() {
        let mut seen = vec![false; vertices.len()];
        let (mut v, mut sum) = (start, 0);
        seen[v] = true;
        while let Some((w, label)) = next[v] {
            if seen[w] {
                return Err(Error::UnsupportedMap(format!(
                    "critical points {} and {} lie on a common periodic orbit",
                    vertices[start], vertices[w]
                )));
            }
            seen[w] = true;
            sum += label;
            v = w;
        }
        e = e.max(sum);
    }
    Ok(CriticalGraph { vertices, edges, e })
}

/// Geometric candidate scales `0.5·0.75^k` tried by
/// [`backward_stability_scale`].
pub fn stability_candidates() -> impl Iterator<Item = f64> {
    (0..40).map(|k| 0.5 * 0.75f64.powi(k))
}

/// Depth of the pull-back experiments behind [`backward_stability_scale`].
pub const STABILITY_DEPTH: usize = 8;

/// Largest candidate `η` such that for sampled `U` with `|U| = η` and every
/// pull-back `W` of `U` by `f^n`, `n ≤ STABILITY_DEPTH`, all intermediate
/// images `f^i(W)` have length at most `ε`. An empirical witness only.
pub fn backward_stability_scale(map: &SmoothMap, epsilon: f64, grid: usize) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("epsilon = {epsilon} must be positive")));
    }
    for eta in stability_candidates() {
        if eta <= epsilon && stability_holds(map, eta, epsilon, grid, STABILITY_DEPTH)? {
            return Ok(eta);
        }
    }
    Err(Error::NoScaleFound { epsilon })
}

/// Checks the implication behind [`backward_stability_scale`] for one `η`.
pub fn stability_holds(
    map: &SmoothMap,
    eta: f64,
    epsilon: f64,
    grid: usize,
    depth: usize,
) -> Result<bool> {
    let grid = grid.max(1);
    for k in 0..grid {
        let a = (1.0 - eta) * k as f64 / (grid.max(2) - 1) as f64;
        let u = Interval {
            lo: a,
            hi: (a + eta).min(1.0),
        };
        let ok = chain_lengths_ok(map, &u, epsilon, depth)?;
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

fn chain_lengths_ok(map: &SmoothMap, u: &Interval, epsilon: f64, depth: usize) -> Result<bool> {
    // Walk the tree level by level; every node at level k is a pull-back of
    // U by f^k and its forward images are checked directly.
    let mut level = vec![*u];
    for k in 1..=depth {
        let mut next = Vec::new();
        for v in &level {
            for p in preimage_pieces(map, v) {
                let mut acc = p.interval;
                for _ in 0..=k {
                    if acc.len() > epsilon + 1e-12 {
                        return Ok(false);
                    }
                    acc = map.image(&acc);
                }
                next.push(p.interval);
            }
        }
        if next.len() > DEFAULT_CAP {
            return Err(Error::Resource {
                what: "stability experiment components",
                count: next.len(),
                cap: DEFAULT_CAP,
            });
        }
        level = next;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::span(lo, hi).unwrap()
    }

    #[test]
    fn preimage_examples() {
        let f = SmoothMap::chebyshev();
        let c = preimage_components(&f, &iv(0.0, 0.36)).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c[0].interval.hi - 0.1).abs() < 1e-15 && c[0].interval.lo == 0.0);
        assert!((c[1].interval.lo - 0.9).abs() < 1e-15 && c[1].interval.hi == 1.0);
        assert!(c.iter().all(|w| w.diffeomorphic));

        let c = preimage_components(&f, &iv(0.84, 1.0)).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].interval.lo - 0.3).abs() < 1e-12);
        assert!((c[0].interval.hi - 0.7).abs() < 1e-12);
        assert!(!c[0].diffeomorphic);

        let c = preimage_components(&f, &Interval::UNIT).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].interval, Interval::UNIT);
        assert!(!c[0].diffeomorphic);
    }

    #[test]
    fn pullback_examples() {
        let f = SmoothMap::chebyshev();
        let w = pullbacks(&f, &iv(0.0, 0.36), 2).unwrap();
        assert_eq!(w.len(), 3);
        // x = (1 − √(1 − y))/2 applied twice from y = 0.36.
        let inner = (1.0 - (1.0f64 - 0.1).sqrt()) / 2.0;
        let mid_lo = (1.0 - (1.0f64 - 0.9).sqrt()) / 2.0;
        assert!((w[0].interval.hi - inner).abs() < 1e-12);
        assert!((w[1].interval.lo - mid_lo).abs() < 1e-12);
        assert!((w[1].interval.hi - (1.0 - mid_lo)).abs() < 1e-12);
        assert!((w[2].interval.lo - (1.0 - inner)).abs() < 1e-12);
        assert!(w[0].diffeomorphic && w[2].diffeomorphic && !w[1].diffeomorphic);
        assert!((w[0].interval.hi - 0.02566).abs() < 1e-5);
        assert!((w[1].interval.lo - 0.34189).abs() < 1e-5);

        let w = pullbacks(&f, &Interval::UNIT, 2).unwrap();
        assert_eq!(w.len(), 1);

        // Branches (1 ± √(1 − y))/2 at y = 0.7 and y = 0.8.
        let w = pullbacks(&f, &iv(0.7, 0.8), 1).unwrap();
        assert_eq!(w.len(), 2);
        let (r3, r2) = (0.3f64.sqrt(), 0.2f64.sqrt());
        assert!((w[0].interval.lo - (1.0 - r3) / 2.0).abs() < 1e-14);
        assert!((w[0].interval.hi - (1.0 - r2) / 2.0).abs() < 1e-14);
        assert!((w[1].interval.lo - (1.0 + r2) / 2.0).abs() < 1e-14);
        assert!((w[1].interval.hi - (1.0 + r3) / 2.0).abs() < 1e-14);
        assert!((w[0].interval.hi - 0.27639).abs() < 1e-5);
        assert!((w[1].interval.lo - 0.72361).abs() < 1e-5);
    }

    #[test]
    fn pullback_cap() {
        let f = SmoothMap::chebyshev();
        let r = pullbacks_capped(&f, &iv(0.1, 0.2), 12, 1000);
        assert!(matches!(r, Err(Error::Resource { .. })));
    }

    #[test]
    fn tree_and_lap_routes_agree() {
        let f = SmoothMap::chebyshev();
        for (u, n) in [(iv(0.0, 0.36), 3), (iv(0.2, 0.3), 6), (iv(0.45, 1.0), 5)] {
            let a = pullbacks(&f, &u, n).unwrap();
            let b = pullbacks_in(&f, &u, n, &Interval::UNIT, DEFAULT_CAP).unwrap();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert!((x.interval.lo - y.interval.lo).abs() < 1e-10);
                assert!((x.interval.hi - y.interval.hi).abs() < 1e-10);
                assert_eq!(x.diffeomorphic, y.diffeomorphic);
            }
        }
    }

    #[test]
    fn distortion_examples() {
        let f = SmoothMap::chebyshev();
        let d = distortion(&f, &iv(0.1, 0.2), 1, 17).unwrap();
        assert!((d - 4.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            distortion(&f, &iv(0.4, 0.6), 1, 17),
            Err(Error::NotDiffeomorphic { witness }) if witness == 0.5
        ));
        let t = SmoothMap::tent();
        assert_eq!(distortion(&t, &iv(0.1, 0.2), 2, 17).unwrap(), 1.0);
        assert!(distortion(&t, &iv(0.1, 0.2), 3, 17).is_err());
        // Second iterate folds: f(0.2..0.3) = 0.64..0.84 contains no fold, but
        // f([0.1, 0.4]) = [0.36, 0.96] contains 1/2.
        assert!(distortion(&f, &iv(0.1, 0.4), 2, 17).is_err());
    }

    #[test]
    fn cross_ratio_examples() {
        assert!((cross_ratio(&iv(0.0, 1.0), &iv(0.4, 0.6)).unwrap() - 1.25).abs() < 1e-12);
        assert_eq!(cross_ratio(&iv(0.0, 4.0), &iv(1.0, 3.0)).unwrap(), 8.0);
        assert!(matches!(
            cross_ratio(&iv(0.0, 1.0), &iv(0.0, 0.5)),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn covering_time_examples() {
        let f = SmoothMap::chebyshev();
        assert_eq!(covering_time(&f, 1.0, 100).unwrap(), 1);
        assert_eq!(covering_time(&f, 0.5, 100).unwrap(), 3);
        let g = SmoothMap::quadratic(3.5).unwrap();
        assert!(matches!(
            covering_time(&g, 0.9, 100),
            Err(Error::NotTopologicallyExact { .. })
        ));
        assert!(covering_time(&f, 0.0, 10).is_err());
    }

    #[test]
    fn chebyshev_critical_graph_is_empty() {
        let g = critical_graph(&SmoothMap::chebyshev(), 50).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(g.e, 0);
        assert_eq!(g.vertices, vec![0.5]);
    }

    #[test]
    fn periodic_critical_point_is_rejected() {
        // a = 2: the critical point 1/2 is a fixed point.
        let f = SmoothMap::quadratic(2.0).unwrap();
        assert!(matches!(critical_graph(&f, 10), Err(Error::UnsupportedMap(_))));
    }

    #[test]
    fn stability_scale_examples() {
        let f = SmoothMap::chebyshev();
        assert_eq!(backward_stability_scale(&f, 1.0, 16).unwrap(), 0.5);
        assert!(backward_stability_scale(&f, 0.0, 16).is_err());
        let eta = backward_stability_scale(&f, 0.3, 16).unwrap();
        assert!(eta < 0.3);
    }
}
