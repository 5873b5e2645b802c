use serde::Serialize;

use super::{
    distortion, image_iter, pullbacks_in, visit_pullbacks, PullBack, DEFAULT_CAP, INTERIOR_SLACK,
};
use crate::error::{Error, Result};
use crate::maps::{Interval, SmoothMap};

/// One element of `P_n(η)`: a pull-back `W` of `B(x_k, η)` by `f^n` with
/// `x_k ∈ f^n(W)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionElement {
    pub pullback: PullBack,
    /// Index `k` of the base point `x_k = k/M`.
    pub base: usize,
    /// `f^n(W)`.
    pub image: Interval,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionPn {
    pub n: usize,
    pub eta: f64,
    pub m: usize,
    pub base_points: Vec<f64>,
    /// Sorted by left endpoint.
    pub elements: Vec<PartitionElement>,
}

/// Outcome of the exhaustive property checks on a partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionCheck {
    pub grid: usize,
    pub uncovered: usize,
    pub window_violations: usize,
    pub max_neighbours: usize,
    /// Pairs of overlapping elements whose base indices differ by more
    /// than one.
    pub distant_overlaps: usize,
}

impl PartitionCheck {
    pub fn holds(&self) -> bool {
        self.uncovered == 0
            && self.window_violations == 0
            && self.max_neighbours <= 4
            && self.distant_overlaps == 0
    }
}

fn check_eta(eta: f64) -> Result<usize> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::arg(format!("eta = {eta} must lie in (0, 1/2)")));
    }
    Ok((1.0 / eta).floor() as usize + 1)
}

/// Base points `x_k = k/M`, `k = 1..M−1`, with `M = ⌊1/η⌋ + 1`.
pub fn base_points(eta: f64) -> Result<(usize, Vec<f64>)> {
    let m = check_eta(eta)?;
    Ok((m, (1..m).map(|k| k as f64 / m as f64).collect()))
}

/// Streams the elements of `P_n(η)` base point by base point. Distortion
/// is left unset.
pub fn visit_partition<F: FnMut(PartitionElement)>(
    map: &SmoothMap,
    n: usize,
    eta: f64,
    cap: usize,
    visit: &mut F,
) -> Result<usize> {
    if n == 0 {
        return Err(Error::arg("partition needs n >= 1"));
    }
    let (_, xs) = base_points(eta)?;
    let mut total = 0;
    for (i, &x) in xs.iter().enumerate() {
        let ball = Interval::ball(x, eta);
        visit_pullbacks(map, &ball, n, cap, &mut |w: PullBack| {
            let image = if w.diffeomorphic {
                ball
            } else {
                image_iter(map, &w.interval, n)
            };
            if image.contains(x) {
                total += 1;
                visit(PartitionElement {
                    pullback: w,
                    base: i + 1,
                    image,
                });
            }
        })?;
    }
    Ok(total)
}

/// The partition `P_n(η)` of `[0, 1]`, with distortion measured on every
/// diffeomorphic element.
pub fn partition_pn(map: &SmoothMap, n: usize, eta: f64) -> Result<PartitionPn> {
    let (m, base_points) = base_points(eta)?;
    let mut elements = Vec::new();
    visit_partition(map, n, eta, DEFAULT_CAP, &mut |e| elements.push(e))?;
    if elements.len() > DEFAULT_CAP {
        return Err(Error::Resource {
            what: "partition elements",
            count: elements.len(),
            cap: DEFAULT_CAP,
        });
    }
    finish(map, n, eta, m, base_points, elements)
}

fn finish(
    map: &SmoothMap,
    n: usize,
    eta: f64,
    m: usize,
    base_points: Vec<f64>,
    mut elements: Vec<PartitionElement>,
) -> Result<PartitionPn> {
    use rayon::prelude::*;
    elements.sort_by(|a, b| {
        a.pullback
            .interval
            .lo
            .total_cmp(&b.pullback.interval.lo)
            .then(a.base.cmp(&b.base))
    });
    elements
        .par_iter_mut()
        .filter(|e| e.pullback.diffeomorphic)
        .for_each(|e| e.pullback.distortion = distortion(map, &e.pullback.interval, n, 17).ok());
    Ok(PartitionPn {
        n,
        eta,
        m,
        base_points,
        elements,
    })
}

/// Elements of `P_n(η)` meeting the interior of `region`.
///
/// Built from the laps of `f^n` over a padded copy of `region`, which keeps
/// the cost proportional to `|region|`. Elements touching the padding
/// boundary may be clipped; when one of them also meets `region` the
/// padding is doubled and the computation repeated.
pub fn partition_in(map: &SmoothMap, n: usize, eta: f64, region: &Interval) -> Result<PartitionPn> {
    let (m, base_points) = base_points(eta)?;
    let mut pad = (region.len() * 0.25).max(1e-3);
    loop {
        let padded = Interval {
            lo: (region.lo - pad).max(0.0),
            hi: (region.hi + pad).min(1.0),
        };
        let mut elements = Vec::new();
        let mut clipped = false;
        for (i, &x) in base_points.iter().enumerate() {
            let ball = Interval::ball(x, eta);
            for w in pullbacks_in(map, &ball, n, &padded, DEFAULT_CAP)? {
                let iv = w.interval;
                if !iv.overlaps(region, 0.0) {
                    continue;
                }
                let touches = (iv.lo <= padded.lo && padded.lo > 0.0)
                    || (iv.hi >= padded.hi && padded.hi < 1.0);
                if touches {
                    clipped = true;
                    break;
                }
                let image = if w.diffeomorphic {
                    ball
                } else {
                    image_iter(map, &iv, n)
                };
                if image.contains(x) {
                    elements.push(PartitionElement {
                        pullback: w,
                        base: i + 1,
                        image,
                    });
                }
            }
            if clipped {
                break;
            }
        }
        if !clipped {
            return finish(map, n, eta, m, base_points, elements);
        }
        if padded == Interval::UNIT {
            unreachable!("an unpadded computation cannot clip");
        }
        pad *= 2.0;
    }
}

impl PartitionPn {
    /// Coverage on a uniform grid of `grid + 1` points, the image-length
    /// window `[η, 2η]`, and neighbour counts by interior overlap.
    pub fn check(&self, grid: usize) -> PartitionCheck {
        let tol = 1e-9;
        let window_violations = self
            .elements
            .iter()
            .filter(|e| {
                let l = e.image.len();
                l < self.eta - tol || l > 2.0 * self.eta + tol
            })
            .count();

        // Coverage by the union of the (sorted) elements.
        let mut union: Vec<(f64, f64)> = Vec::new();
        for e in &self.elements {
            let iv = e.pullback.interval;
            match union.last_mut() {
                Some(last) if iv.lo <= last.1 + 1e-12 => last.1 = last.1.max(iv.hi),
                _ => union.push((iv.lo, iv.hi)),
            }
        }
        let mut uncovered = 0;
        let mut idx = 0;
        for k in 0..=grid {
            let x = k as f64 / grid as f64;
            while idx < union.len() && union[idx].1 < x {
                idx += 1;
            }
            if idx == union.len() || union[idx].0 > x {
                uncovered += 1;
            }
        }

        let mut neighbours = vec![0usize; self.elements.len()];
        let mut distant_overlaps = 0;
        for i in 0..self.elements.len() {
            let a = &self.elements[i];
            for j in i + 1..self.elements.len() {
                let b = &self.elements[j];
                if b.pullback.interval.lo >= a.pullback.interval.hi - INTERIOR_SLACK {
                    break;
                }
                if a.pullback.interval.overlaps(&b.pullback.interval, INTERIOR_SLACK) {
                    neighbours[i] += 1;
                    neighbours[j] += 1;
                    if a.base.abs_diff(b.base) > 2 {
                        distant_overlaps += 1;
                    }
                }
            }
        }
        PartitionCheck {
            grid,
            uncovered,
            window_violations,
            max_neighbours: neighbours.into_iter().max().unwrap_or(0),
            distant_overlaps,
        }
    }
}
