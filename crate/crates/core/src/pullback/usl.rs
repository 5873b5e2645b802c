use serde::Serialize;

use super::{distortion, fold_witness, image_iter, pullbacks_in, PullBack, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::maps::{Interval, SmoothMap};
use crate::numeric::invert_monotone;

/// Constants of the uniform scale search.
#[derive(Debug, Clone, Serialize)]
pub struct UslParams {
    pub epsilon: f64,
    pub eta: f64,
    pub kappa: f64,
    /// Extension budget: at most `C·ln n` steps beyond `n`.
    pub c: f64,
    /// Exponent of the pulled-back ball radius `n^{−α}`.
    pub alpha: f64,
    /// Candidate safe points, e.g. from [`crate::safety::safe_dense_set`].
    pub safe_points: Vec<f64>,
}

/// The four conclusions, rechecked by direct measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UslCertificate {
    /// `|J| ≥ e^{−εn}|W|`.
    pub length: bool,
    /// `n ≤ m ≤ n + C ln n`.
    pub time: bool,
    /// `|f^m(J)| ≥ κ`.
    pub scale: bool,
    /// `f^m` diffeomorphic on `J` with distortion `≤ e^{εn}`.
    pub distortion: bool,
}

impl UslCertificate {
    pub fn all(&self) -> bool {
        self.length && self.time && self.scale && self.distortion
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UslResult {
    pub j: Interval,
    pub m: usize,
    pub image: Interval,
    pub distortion: f64,
    /// Safe point used, `None` for the trivial case.
    pub safe_point: Option<f64>,
    /// The pull-back `Ĵ ⊂ W` of the safe ball.
    pub jhat: Option<Interval>,
    pub certificate: UslCertificate,
}

/// Finds `J ⊂ W` and `m` such that `f^m` maps `J` diffeomorphically onto an
/// interval of length at least `κ` with distortion at most `e^{εn}`.
///
/// If `f^n` already maps `W` diffeomorphically onto an interval of length at
/// least `κ`, the answer is the middle third of `W` with `m = n`. Otherwise
/// a safe point `x` near the middle of `f^n(W)` is chosen, the largest
/// pull-back `Ĵ ⊂ W` of `U = B(x, r)` is taken, `U` is pushed forward until
/// it reaches length `3κ`, and `J` is the pull-back by `f^m` of the middle
/// third of `f^m(Ĵ)`. Safe points are tried closest first and the first one
/// that completes is returned.
pub fn uniform_scale_search(
    map: &SmoothMap,
    w: &PullBack,
    params: &UslParams,
) -> Result<UslResult> {
    let n = w.time;
    let wi = w.interval;
    // A diffeomorphic pull-back maps onto its target exactly; recomputing
    // the image forward would add an error of order ulp·|Df^n|.
    let image = if w.diffeomorphic {
        w.target
    } else {
        image_iter(map, &wi, n)
    };
    let eta = params.eta;
    if image.len() < eta - 1e-9 || image.len() > 2.0 * eta + 1e-9 {
        return Err(Error::Precondition(format!(
            "|f^n(W)| = {} is outside [{eta}, {}]",
            image.len(),
            2.0 * eta
        )));
    }
    let budget = params.c * (n as f64).ln();

    if w.diffeomorphic && image.len() >= params.kappa {
        let j = wi.middle_third();
        return Ok(certify(map, &wi, j, n, n, None, None, params, budget));
    }

    let centre = image.mid();
    let mut candidates: Vec<f64> = params
        .safe_points
        .iter()
        .copied()
        .filter(|&x| (x - centre).abs() <= eta / 3.0)
        .collect();
    candidates.sort_by(|a, b| (a - centre).abs().total_cmp(&(b - centre).abs()).then(a.total_cmp(b)));
    if candidates.is_empty() {
        return Err(Error::SearchFailure(format!(
            "no safe point within {} of the midpoint {centre}",
            eta / 3.0
        )));
    }

    let radius = (n as f64).powf(-params.alpha).min(eta / 6.0);
    let mut last_reason = String::new();
    for x in candidates {
        let u = Interval::ball(x, radius);
        if !image.contains_interval(&u, 0.0) {
            last_reason = format!("B({x}, {radius}) is not inside f^n(W)");
            continue;
        }
        let pieces = pullbacks_in(map, &u, n, &wi, DEFAULT_CAP)?;
        let Some(jhat) = pieces
            .iter()
            .filter(|p| p.diffeomorphic)
            .max_by(|a, b| {
                a.interval
                    .len()
                    .total_cmp(&b.interval.len())
                    .then(b.interval.lo.total_cmp(&a.interval.lo))
            })
            .map(|p| p.interval)
        else {
            last_reason = format!("no diffeomorphic pull-back of B({x}, {radius}) inside W");
            continue;
        };
        // Push U forward until it reaches scale 3κ without meeting a fold.
        let mut k = 0;
        let mut fu = u;
        while fu.len() < 3.0 * params.kappa {
            if k as f64 >= budget || fold_witness(map, &fu, 1).is_some() {
                break;
            }
            fu = map.image(&fu);
            k += 1;
        }
        if fu.len() < 3.0 * params.kappa {
            last_reason = format!("scale 3κ not reached from B({x}, {radius}) within {k} steps");
            continue;
        }
        let m = n + k;
        let big = image_iter(map, &jhat, m);
        let target = big.middle_third();
        let increasing = map.iterate(jhat.hi, m) >= map.iterate(jhat.lo, m);
        let g = |y: f64| invert_monotone(|t| map.iterate(t, m), jhat.lo, jhat.hi, increasing, y);
        let j = Interval::hull(g(target.lo), g(target.hi));
        return Ok(certify(map, &wi, j, n, m, Some(x), Some(jhat), params, budget));
    }
    Err(Error::SearchFailure(last_reason))
}

#[allow(clippy::too_many_arguments)]
fn certify(
    map: &SmoothMap,
    w: &Interval,
    j: Interval,
    n: usize,
    m: usize,
    safe_point: Option<f64>,
    jhat: Option<Interval>,
    params: &UslParams,
    budget: f64,
) -> UslResult {
    let growth = (params.epsilon * n as f64).exp();
    let image = image_iter(map, &j, m);
    let dist = distortion(map, &j, m, 17).unwrap_or(f64::INFINITY);
    let certificate = UslCertificate {
        length: j.len() >= w.len() / growth,
        time: n <= m && (m - n) as f64 <= budget + 1e-12,
        scale: image.len() >= params.kappa,
        distortion: dist <= growth,
    };
    UslResult {
        j,
        m,
        image,
        distortion: dist,
        safe_point,
        jhat,
        certificate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(eta: f64) -> UslParams {
        UslParams {
            epsilon: 0.5,
            eta,
            kappa: 0.01,
            c: 4.0,
            alpha: 2.0,
            safe_points: (0..20).map(|k| 0.025 + 0.05 * k as f64).collect(),
        }
    }

    #[test]
    fn trivial_instance() {
        let f = SmoothMap::chebyshev();
        let w = PullBack {
            interval: Interval::new(0.72361, 0.77460).unwrap(),
            time: 1,
            target: Interval::new(0.7, 0.8).unwrap(),
            diffeomorphic: true,
            distortion: None,
        };
        // The middle third keeps a third of W, so the length clause needs
        // e^{−εn} ≤ 1/3.
        let p = UslParams {
            epsilon: 1.2,
            ..params(0.1)
        };
        let r = uniform_scale_search(&f, &w, &p).unwrap();
        assert_eq!(r.m, 1);
        assert_eq!(r.j, w.interval.middle_third());
        assert!(r.safe_point.is_none());
        assert!(r.certificate.all());
    }

    #[test]
    fn precondition_on_image_length() {
        let f = SmoothMap::chebyshev();
        let w = PullBack {
            interval: Interval::new(0.72361, 0.77460).unwrap(),
            time: 1,
            target: Interval::new(0.7, 0.8).unwrap(),
            diffeomorphic: true,
            distortion: None,
        };
        assert!(matches!(
            uniform_scale_search(&f, &w, &params(0.3)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn folded_element_goes_through_a_safe_point() {
        // B(0.95, 0.1) contains the critical value 1, so some of its
        // pull-backs by f^3 are folded.
        let f = SmoothMap::chebyshev();
        let eta = 0.1;
        let u = Interval::ball(0.95, eta);
        let ws = super::super::pullbacks(&f, &u, 3).unwrap();
        let w = ws.iter().find(|w| !w.diffeomorphic).unwrap();
        assert!(!w.diffeomorphic);
        let r = uniform_scale_search(&f, w, &params(eta)).unwrap();
        assert!(r.safe_point.is_some());
        assert!(w.interval.contains_interval(&r.j, 0.0));
        assert!(r.certificate.time && r.certificate.scale, "{r:?}");
    }
}
