use serde::Serialize;

use super::CLAUSE_SAMPLES;
use crate::error::{Error, Result};
use crate::maps::{birkhoff_unchecked, Interval, Observable, SmoothMap};
use crate::pullback::{pullbacks_in, DEFAULT_CAP};
use crate::thermo::{MeasureStats, Support};

/// Candidate sets `K` for positive-entropy targets.
const CANDIDATE_SETS: [(f64, f64); 3] = [(0.2, 0.8), (0.3, 0.7), (0.1, 0.9)];
const MAX_BLOCK_TIME: usize = 12;

/// An invariant measure seen through its statistics and the integrals
/// `∫φ_j dμ` of the observables it is compared against.
#[derive(Debug, Clone)]
pub struct KatokTarget {
    pub stats: MeasureStats,
    pub integrals: Vec<f64>,
}

/// `k` disjoint intervals `K_i ⊂ K` that `f^m` maps diffeomorphically onto
/// `K`, with Birkhoff averages and derivatives inside the target windows.
#[derive(Debug, Clone, Serialize)]
pub struct KatokBlocks {
    pub k: usize,
    pub m: usize,
    pub set: Interval,
    pub blocks: Vec<Interval>,
}

impl KatokBlocks {
    /// `(1/m) log k`.
    pub fn entropy_rate(&self) -> f64 {
        (self.k as f64).ln() / self.m as f64
    }
}

fn birkhoff_window(
    map: &SmoothMap,
    observables: &[Observable],
    integrals: &[f64],
    l: &Interval,
    m: usize,
    eps: f64,
) -> bool {
    observables.iter().zip(integrals).all(|(phi, &mean)| {
        l.linspace(CLAUSE_SAMPLES)
            .all(|x| (birkhoff_unchecked(map, phi, x, m) / m as f64 - mean).abs() < eps)
    })
}

/// Searches for blocks realising the target's entropy and exponents.
///
/// Periodic targets get the single block of the pull-back of `K = B(p, r)`
/// by `f^period` containing `p`, with `r` halved from 0.05 until it lies
/// inside `K`. Only the upper derivative bound is required there: at a
/// periodic point the lower one can fail on any neighbourhood where the
/// derivative varies. Positive-entropy targets are searched over a few
/// fixed sets `K` and `m ≤ 12`, requiring `k ≥ 2` and `(1/m) log k ≥ h − ε`.
pub fn katok_blocks(
    map: &SmoothMap,
    target: &KatokTarget,
    observables: &[Observable],
    epsilon: f64,
) -> Result<KatokBlocks> {
    if !(epsilon > 0.0) {
        return Err(Error::arg("katok_blocks needs epsilon > 0"));
    }
    if observables.len() != target.integrals.len() {
        return Err(Error::arg("one integral per observable is required"));
    }
    let lambda = target.stats.lyapunov;
    match &target.stats.support {
        Support::PeriodicOrbit { points } if target.stats.entropy == 0.0 => {
            let p = points[0];
            let period = points.len();
            let upper = ((lambda + epsilon) * period as f64).exp();
            let mut r = 0.05;
            for _ in 0..40 {
                let k = Interval {
                    lo: (p - r).max(0.0),
                    hi: (p + r).min(1.0),
                };
                let block = pullbacks_in(map, &k, period, &k, DEFAULT_CAP)?
                    .into_iter()
                    .find(|b| b.interval.contains(p));
                if let Some(b) = block {
                    let l = b.interval;
                    let ok = b.diffeomorphic
                        && k.contains_interval(&l, 0.0)
                        && birkhoff_window(map, observables, &target.integrals, &l, period, epsilon)
                        && l.linspace(CLAUSE_SAMPLES)
                            .all(|x| map.deriv_iter(x, period).abs() <= upper);
                    if ok {
                        return Ok(KatokBlocks {
                            k: 1,
                            m: period,
                            set: k,
                            blocks: vec![l],
                        });
                    }
                }
                r *= 0.5;
            }
            Err(Error::SearchFailure(format!(
                "no neighbourhood of the periodic point {p} returns into itself"
            )))
        }
        _ => {
            let h = target.stats.entropy;
            for m in 1..=MAX_BLOCK_TIME {
                let lo = ((lambda - epsilon) * m as f64).exp();
                let hi = ((lambda + epsilon) * m as f64).exp();
                for (a, b) in CANDIDATE_SETS {
                    let k = Interval { lo: a, hi: b };
                    let blocks: Vec<Interval> = pullbacks_in(map, &k, m, &k, DEFAULT_CAP)?
                        .into_iter()
                        .filter(|p| p.diffeomorphic && k.contains_interval(&p.interval, 0.0))
                        .map(|p| p.interval)
                        .filter(|l| {
                            birkhoff_window(map, observables, &target.integrals, l, m, epsilon)
                                && l.linspace(CLAUSE_SAMPLES).all(|x| {
                                    let d = map.deriv_iter(x, m).abs();
                                    lo <= d && d <= hi
                                })
                        })
                        .collect();
                    let count = blocks.len();
                    if count >= 2 && (count as f64).ln() / m as f64 >= h - epsilon {
                        return Ok(KatokBlocks {
                            k: count,
                            m,
                            set: k,
                            blocks,
                        });
                    }
                }
            }
            Err(Error::SearchFailure(format!(
                "no admissible blocks with m <= {MAX_BLOCK_TIME}"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{measure_stats_periodic, measure_stats_ulam, ulam_operator, DEFAULT_BINS};

    #[test]
    fn fixed_point_block() {
        let f = SmoothMap::chebyshev();
        let target = KatokTarget {
            stats: measure_stats_periodic(&f, 0.75, 1).unwrap(),
            integrals: vec![0.75],
        };
        let kb = katok_blocks(&f, &target, &[Observable::Identity], 0.1).unwrap();
        assert_eq!((kb.k, kb.m), (1, 1));
        assert!((kb.set.lo - 0.7).abs() < 1e-12 && (kb.set.hi - 0.8).abs() < 1e-12);
        let inv = |y: f64| 0.5 * (1.0 + (1.0 - y).sqrt());
        assert!((kb.blocks[0].lo - inv(0.8)).abs() < 1e-12);
        assert!((kb.blocks[0].hi - inv(0.7)).abs() < 1e-12);
        assert!((kb.blocks[0].lo - 0.72361).abs() < 1e-5);
    }

    #[test]
    fn acip_blocks() {
        let f = SmoothMap::chebyshev();
        let op = ulam_operator(&f, DEFAULT_BINS, &Observable::Zero).unwrap();
        let target = KatokTarget {
            stats: measure_stats_ulam(&op).unwrap(),
            integrals: vec![0.5],
        };
        let kb = katok_blocks(&f, &target, &[Observable::Identity], 0.3).unwrap();
        assert!(kb.k >= 2);
        assert!(kb.entropy_rate() >= 2f64.ln() - 0.3);
        assert!(kb.blocks.windows(2).all(|w| w[0].hi < w[1].lo));
        for l in &kb.blocks {
            let img = crate::pullback::image_iter(&f, l, kb.m);
            assert!((img.lo - kb.set.lo).abs() < 1e-9 && (img.hi - kb.set.hi).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_epsilon_is_rejected() {
        let f = SmoothMap::chebyshev();
        let target = KatokTarget {
            stats: measure_stats_periodic(&f, 0.75, 1).unwrap(),
            integrals: vec![],
        };
        assert!(matches!(katok_blocks(&f, &target, &[], 0.0), Err(Error::Argument(_))));
    }
}
