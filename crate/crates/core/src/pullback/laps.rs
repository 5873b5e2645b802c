use crate::error::{Error, Result};
use crate::maps::{Interval, SmoothMap};

use super::{merge_pieces, Piece, PullBack};

/// A maximal monotone branch of `f^n`, with the sequence of laps of `f`
/// visited along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateLap {
    pub domain: Interval,
    pub increasing: bool,
    pub image: Interval,
    pub itinerary: Vec<u16>,
}

impl IterateLap {
    /// The point of `domain` mapped to `y` by `f^n` (`y` clamped to `image`).
    pub fn inverse(&self, map: &SmoothMap, y: f64) -> f64 {
        invert_itinerary(map, &self.itinerary, &self.domain, &self.image, self.increasing, y)
    }
}

fn invert_itinerary(
    map: &SmoothMap,
    itinerary: &[u16],
    domain: &Interval,
    image: &Interval,
    increasing: bool,
    y: f64,
) -> f64 {
    if y <= image.lo {
        return if increasing { domain.lo } else { domain.hi };
    }
    if y >= image.hi {
        return if increasing { domain.hi } else { domain.lo };
    }
    let x = itinerary
        .iter()
        .rev()
        .fold(y, |v, &lap| map.inverse_on_lap(lap as usize, v));
    x.clamp(domain.lo, domain.hi)
}

/// All laps of `f^n` on `[0, 1]`, in increasing order of position.
pub fn iterate_laps(map: &SmoothMap, n: usize, cap: usize) -> Result<Vec<IterateLap>> {
    let mut out = Vec::new();
    visit_laps_in(map, &Interval::UNIT, n, cap, &mut |l: &IterateLap| out.push(l.clone()))?;
    Ok(out)
}

/// Visits the laps of `f^n` restricted to `region`, left to right. Laps
/// crossing the boundary of `region` are clipped to it. Returns the count.
pub fn visit_laps_in<F: FnMut(&IterateLap)>(
    map: &SmoothMap,
    region: &Interval,
    n: usize,
    cap: usize,
    visit: &mut F,
) -> Result<usize> {
    if n == 0 {
        return Err(Error::arg("lap iteration needs n >= 1"));
    }
    let mut state = LapWalk {
        map,
        n,
        cap,
        count: 0,
        itinerary: Vec::with_capacity(n),
    };
    for (j, lap) in map.laps().iter().enumerate() {
        let Some(dom) = lap.domain.intersect(region) else {
            continue;
        };
        if dom.is_degenerate() && !region.is_degenerate() {
            continue;
        }
        let image = Interval::hull(map.apply(dom.lo), map.apply(dom.hi));
        state.itinerary.push(j as u16);
        state.walk(dom, lap.increasing, image, 1, visit)?;
        state.itinerary.pop();
    }
    Ok(state.count)
}

struct LapWalk<'a> {
    map: &'a SmoothMap,
    n: usize,
    cap: usize,
    count: usize,
    itinerary: Vec<u16>,
}

impl LapWalk<'_> {
    fn walk<F: FnMut(&IterateLap)>(
        &mut self,
        domain: Interval,
        increasing: bool,
        image: Interval,
        k: usize,
        visit: &mut F,
    ) -> Result<()> {
        if k == self.n {
            self.count += 1;
            if self.count > self.cap {
                return Err(Error::Resource {
                    what: "laps of the iterate",
                    count: self.count,
                    cap: self.cap,
                });
            }
            visit(&IterateLap {
                domain,
                increasing,
                image,
                itinerary: self.itinerary.clone(),
            });
            return Ok(());
        }
        // Split the image at turning points of f; each piece lies in one lap.
        let map = self.map;
        let mut cuts = vec![image.lo];
        cuts.extend(
            map.turning_points()
                .iter()
                .copied()
                .filter(|&t| image.contains_interior(t)),
        );
        cuts.push(image.hi);
        let xs: Vec<f64> = cuts
            .iter()
            .map(|&y| {
                invert_itinerary(map, &self.itinerary, &domain, &image, increasing, y)
            })
            .collect();
        let pieces = cuts.len() - 1;
        let order: Vec<usize> = if increasing {
            (0..pieces).collect()
        } else {
            (0..pieces).rev().collect()
        };
        for p in order {
            let (ya, yb) = (cuts[p], cuts[p + 1]);
            if yb <= ya && !image.is_degenerate() {
                continue;
            }
            let j = map.lap_index(0.5 * (ya + yb));
            let lap = &map.laps()[j];
            let sub_dom = Interval::hull(xs[p], xs[p + 1]);
            let sub_img = Interval::hull(map.apply(ya), map.apply(yb));
            self.itinerary.push(j as u16);
            self.walk(sub_dom, increasing == lap.increasing, sub_img, k + 1, visit)?;
            self.itinerary.pop();
        }
        Ok(())
    }
}

/// Connected components of `f^{-n}(U) ∩ region`, assembled from the laps of
/// `f^n`. This is the forward counterpart of [`super::pullbacks`].
pub fn pullbacks_in(
    map: &SmoothMap,
    u: &Interval,
    n: usize,
    region: &Interval,
    cap: usize,
) -> Result<Vec<PullBack>> {
    let mut pieces: Vec<Piece> = Vec::new();
    visit_laps_in(map, region, n, cap, &mut |lap: &IterateLap| {
        let Some(v) = u.intersect(&lap.image) else {
            return;
        };
        let a = lap.inverse(map, v.lo);
        let b = lap.inverse(map, v.hi);
        pieces.push(Piece {
            interval: Interval::hull(a, b),
            onto: lap.image.contains_interval(u, 1e-12),
        });
    })?;
    let parts = merge_pieces(pieces);
    Ok(parts
        .into_iter()
        .map(|p| PullBack {
            interval: p.interval,
            time: n,
            target: *u,
            diffeomorphic: p.onto,
            distortion: None,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_lap_counts() {
        let f = SmoothMap::chebyshev();
        for n in 1..=10 {
            let laps = iterate_laps(&f, n, 1 << 20).unwrap();
            assert_eq!(laps.len(), 1 << n);
            assert!(laps.windows(2).all(|w| w[0].domain.hi == w[1].domain.lo));
            assert_eq!(laps[0].domain.lo, 0.0);
            assert_eq!(laps.last().unwrap().domain.hi, 1.0);
        }
    }

    #[test]
    fn lap_endpoints_match_conjugacy() {
        // Turning points of f^n are sin²(πk/2^{n+1}).
        let f = SmoothMap::chebyshev();
        let n = 6;
        let laps = iterate_laps(&f, n, 1 << 20).unwrap();
        for (k, lap) in laps.iter().enumerate().skip(1) {
            let s = (std::f64::consts::PI * k as f64 / (1u64 << (n + 1)) as f64).sin();
            assert!((lap.domain.lo - s * s).abs() < 1e-12, "lap {k}");
        }
    }

    #[test]
    fn inverse_round_trip() {
        let f = SmoothMap::chebyshev();
        for lap in iterate_laps(&f, 5, 1 << 20).unwrap() {
            let x = lap.inverse(&f, 0.3);
            assert!((f.iterate(x, 5) - 0.3).abs() < 1e-9);
            assert!(lap.domain.contains(x));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let f = SmoothMap::chebyshev();
        assert!(matches!(
            iterate_laps(&f, 10, 100),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn region_restriction() {
        let f = SmoothMap::chebyshev();
        let r = Interval::new(0.2, 0.3).unwrap();
        let mut doms = Vec::new();
        visit_laps_in(&f, &r, 4, 1000, &mut |l: &IterateLap| doms.push(l.domain)).unwrap();
        assert_eq!(doms[0].lo, 0.2);
        assert_eq!(doms.last().unwrap().hi, 0.3);
        assert!(doms.windows(2).all(|w| w[0].hi == w[1].lo));
    }
}
