use serde::Serialize;

use super::{image_iter, partition::visit_partition, PartitionElement};
use crate::error::Result;
use crate::maps::{Interval, SmoothMap};

/// Cap on the pull-backs of one base ball; chebyshev has about `2^n`.
const RATIO_CAP: usize = 1 << 22;

/// Outcome of testing `|f^n J|/|f^n W| ≤ e^{εn}|J|/|W|` on the elements of
/// `P_n(η)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioGrowth {
    pub n: usize,
    pub eta: f64,
    pub epsilon: f64,
    pub elements: usize,
    pub pairs: usize,
    pub violations: usize,
    /// Largest `log(ratio) − εn` seen; positive means a violation.
    pub worst_excess: f64,
    /// `(W, J)` attaining `worst_excess`.
    pub witness: Option<(Interval, Interval)>,
}

impl RatioGrowth {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Tests every element `W` of `P_n(η)` against the subintervals `J` with
/// endpoints on a `grid`-point equispaced grid of `W`.
pub fn ratio_growth(
    map: &SmoothMap,
    n: usize,
    eta: f64,
    epsilon: f64,
    grid: usize,
) -> Result<RatioGrowth> {
    let grid = grid.max(2);
    let bound = epsilon * n as f64;
    let mut out = RatioGrowth {
        n,
        eta,
        epsilon,
        elements: 0,
        pairs: 0,
        violations: 0,
        worst_excess: f64::NEG_INFINITY,
        witness: None,
    };
    let mut xs = Vec::with_capacity(grid);
    let mut ys = Vec::with_capacity(grid);
    visit_partition(map, n, eta, RATIO_CAP, &mut |e: PartitionElement| {
        let w = e.pullback.interval;
        if w.len() == 0.0 {
            return;
        }
        out.elements += 1;
        let scale = e.image.len() / w.len();
        xs.clear();
        xs.extend(w.linspace(grid));
        if e.pullback.diffeomorphic {
            ys.clear();
            ys.extend(xs.iter().map(|&x| map.iterate(x, n)));
        }
        for a in 0..grid {
            for b in a + 1..grid {
                let j = Interval {
                    lo: xs[a],
                    hi: xs[b],
                };
                let fj = if e.pullback.diffeomorphic {
                    (ys[b] - ys[a]).abs()
                } else {
                    image_iter(map, &j, n).len()
                };
                let excess = (fj / j.len() / scale).ln() - bound;
                out.pairs += 1;
                if excess > 1e-9 {
                    out.violations += 1;
                }
                if excess > out.worst_excess {
                    out.worst_excess = excess;
                    out.witness = Some((w, j));
                }
            }
        }
    })?;
    Ok(out)
}
