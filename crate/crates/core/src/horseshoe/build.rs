use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ConstraintSet, Horseshoe, CLAUSE_SAMPLES, IMAGE_TOL};
use crate::error::{Error, Result};
use crate::maps::{birkhoff_unchecked, Interval, SmoothMap};
use crate::pullback::{
    covering_time, distortion, image_iter, partition_in, visit_laps_in, pullbacks_in, uniform_scale_search,
    PartitionElement, UslParams, DEFAULT_CAP,
};
use crate::safety::{safe_dense_set, DEFAULT_J_MAX};

/// Horizon of the critical orbit kept away from `x0` and the base.
pub const CRITICAL_HORIZON: usize = 100;
/// Witnesses per partition element when testing `W ∩ H_n ∩ B(x0, ρ) ≠ ∅`.
pub const MEMBERSHIP_WITNESSES: usize = 33;
/// Grid used for covering times.
const COVERING_GRID: usize = 1000;
/// Largest lap count of `f^n` over the base for which the direct route is
/// tried.
const DIRECT_LAP_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Direct first when `f^n` has few laps over the base, else pipeline.
    Auto,
    /// Branches are the diffeomorphic pull-backs of the base by `f^n` that
    /// lie inside it, so `q = n`.
    Direct,
    /// Partition, uniform scale search, majority time and return steps.
    Pipeline,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HorseshoeParams {
    pub eta: f64,
    /// Radius of the inner ball; the base is `B(x0, 2ρ)`. See [`default_rho`].
    pub rho: Option<f64>,
    pub epsilon: f64,
    /// Extension budget of the uniform scale search, `C·ln n` steps.
    pub c: f64,
    /// Safety exponent for the safe points.
    pub alpha_safe: f64,
    /// Scale reached by the uniform scale search; `η/4` when unset.
    pub kappa: Option<f64>,
    pub j_max: usize,
    pub route: Route,
}

impl Default for HorseshoeParams {
    fn default() -> Self {
        HorseshoeParams {
            eta: 0.1,
            rho: None,
            epsilon: 0.1,
            c: 3.0,
            alpha_safe: 2.0,
            kappa: None,
            j_max: DEFAULT_J_MAX,
            route: Route::Auto,
        }
    }
}

/// What the construction did, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildTrace {
    pub route: Route,
    pub rho: f64,
    /// `|Q_n|` and `Σ_{Q_n}|W|`.
    pub q_n: usize,
    pub q_n_mass: f64,
    /// `(extension time p, count, Σ|W|)` per group.
    pub groups: Vec<(usize, usize, f64)>,
    pub p0: usize,
    pub return_steps: usize,
    pub usl_failures: usize,
    /// Elements of the majority group without a return branch.
    pub missing: usize,
    /// `Some(count of W ⊄ B(x0, 2ρ))` when `n ≥ N(ρ)`, else `None`.
    pub base_escapes: Option<usize>,
    /// Branches dropped because `f^q` of their endpoints misses the base
    /// by more than the verification tolerance.
    pub unresolved: usize,
}

/// Largest `ρ = 0.25·0.8^k` with `B(x0, 2ρ)` strictly inside `(0, 1)` and
/// clear of `f^j(c)` for turning points `c` and `1 ≤ j ≤ 100`.
pub fn default_rho(map: &SmoothMap, x0: f64) -> Result<f64> {
    let orbit = critical_orbit(map);
    let mut rho = 0.25;
    for _ in 0..200 {
        let base = Interval::ball(x0, 2.0 * rho);
        let strict = x0 - 2.0 * rho > 0.0 && x0 + 2.0 * rho < 1.0;
        if strict && orbit.iter().all(|&y| !base.contains(y)) {
            return Ok(rho);
        }
        rho *= 0.8;
    }
    Err(Error::Precondition(format!(
        "no admissible radius around x0 = {x0}"
    )))
}

fn critical_orbit(map: &SmoothMap) -> Vec<f64> {
    let mut out = Vec::new();
    for &c in map.turning_points() {
        let mut y = c;
        for _ in 0..CRITICAL_HORIZON {
            y = map.apply(y);
            out.push(y);
        }
    }
    out
}

/// Builds and verifies a horseshoe for the constraint set near `x0`.
pub fn build_horseshoe(
    map: &SmoothMap,
    constraints: &ConstraintSet,
    x0: f64,
    params: &HorseshoeParams,
) -> Result<Horseshoe> {
    let n = constraints.n;
    if n < 2 {
        return Err(Error::arg("horseshoe horizon must be at least 2"));
    }
    if !(params.epsilon > 0.0) {
        return Err(Error::arg("epsilon must be positive"));
    }
    map.eval(x0)?;
    if let Some(y) = critical_orbit(map).into_iter().find(|y| (y - x0).abs() <= 1e-12) {
        return Err(Error::Precondition(format!(
            "x0 = {x0} is on the critical orbit (f^j(c) = {y})"
        )));
    }
    let rho = match params.rho {
        Some(r) => r,
        None => default_rho(map, x0)?,
    };
    if !(rho > 0.0 && x0 - 2.0 * rho > 0.0 && x0 + 2.0 * rho < 1.0) {
        return Err(Error::Precondition(format!(
            "B({x0}, {}) is not inside (0, 1)",
            2.0 * rho
        )));
    }
    let base = Interval::ball(x0, 2.0 * rho);

    let direct_ok = match params.route {
        Route::Direct => true,
        Route::Pipeline => false,
        Route::Auto => base_lap_count(map, &base, n) <= DIRECT_LAP_LIMIT,
    };
    if direct_ok {
        match direct(map, constraints, &base, rho, params) {
            Ok(hs) => return Ok(hs),
            Err(e) if params.route == Route::Direct => return Err(e),
            Err(_) => {}
        }
    }
    pipeline(map, constraints, x0, rho, &base, params)
}

fn base_lap_count(map: &SmoothMap, base: &Interval, n: usize) -> usize {
    let mut count = 0;
    let res = visit_laps_in(map, base, n, DIRECT_LAP_LIMIT + 1, &mut |_| count += 1);
    if res.is_err() { usize::MAX } else { count }
}

fn averages_hold(map: &SmoothMap, constraints: &ConstraintSet, l: &Interval, q: usize, eps: f64) -> bool {
    constraints.constraints.iter().all(|c| {
        let slack = (1.0 + c.phi.lip_bound()) * eps;
        l.linspace(CLAUSE_SAMPLES)
            .all(|x| birkhoff_unchecked(map, &c.phi, x, q) / q as f64 > c.alpha - slack)
    })
}

fn finish(
    map: &SmoothMap,
    constraints: &ConstraintSet,
    base: Interval,
    q: usize,
    mut branches: Vec<(Interval, Option<Interval>)>,
    params: &HorseshoeParams,
    mut trace: BuildTrace,
) -> Result<Horseshoe> {
    // Very thin branches carry `f^q` endpoint errors of order
    // `ulp·|Df^q|`; drop those whose image cannot be resolved to IMAGE_TOL.
    let before = branches.len();
    branches.retain(|(l, _)| {
        let img = image_iter(map, l, q);
        (img.lo - base.lo).abs() <= IMAGE_TOL && (img.hi - base.hi).abs() <= IMAGE_TOL
    });
    trace.unresolved = before - branches.len();
    if branches.is_empty() {
        return Err(Error::SearchFailure(
            "no branch image resolves to the base in floating point".into(),
        ));
    }
    branches.sort_by(|a, b| a.0.lo.total_cmp(&b.0.lo));
    let dists: Vec<f64> = branches
        .par_iter()
        .map(|(l, _)| distortion(map, l, q, CLAUSE_SAMPLES).unwrap_or(f64::INFINITY))
        .collect();
    let delta = dists.iter().copied().fold(1.0, f64::max);
    // Clause (a) allows C·ln n for the scale search and as much again for
    // the return to the base.
    let mut hs = Horseshoe::new(
        base,
        q,
        branches.iter().map(|b| b.0).collect(),
        delta,
        constraints.clone(),
        2.0 * params.c,
        params.epsilon,
    );
    hs.sources = branches.iter().map(|b| b.1).collect();
    if trace.q_n > 0 {
        hs.q_n_mass = Some(trace.q_n_mass);
    }
    hs.trace = Some(trace);
    let (hs, _) = hs.certify(map)?;
    Ok(hs)
}

fn direct(
    map: &SmoothMap,
    constraints: &ConstraintSet,
    base: &Interval,
    rho: f64,
    params: &HorseshoeParams,
) -> Result<Horseshoe> {
    let n = constraints.n;
    let branches: Vec<(Interval, Option<Interval>)> = pullbacks_in(map, base, n, base, DEFAULT_CAP)?
        .into_iter()
        .filter(|p| p.diffeomorphic && base.contains_interval(&p.interval, 0.0))
        .filter(|p| averages_hold(map, constraints, &p.interval, n, params.epsilon))
        .map(|p| (p.interval, None))
        .collect();
    if branches.is_empty() {
        return Err(Error::SearchFailure(
            "no diffeomorphic pull-back of the base by f^n lies inside it".into(),
        ));
    }
    let trace = BuildTrace {
        route: Route::Direct,
        rho,
        q_n: 0,
        q_n_mass: 0.0,
        groups: Vec::new(),
        p0: n,
        return_steps: 0,
        usl_failures: 0,
        missing: 0,
        base_escapes: None,
        unresolved: 0,
    };
    finish(map, constraints, *base, n, branches, params, trace)
}

fn pipeline(
    map: &SmoothMap,
    constraints: &ConstraintSet,
    x0: f64,
    rho: f64,
    base: &Interval,
    params: &HorseshoeParams,
) -> Result<Horseshoe> {
    let n = constraints.n;
    let inner = Interval::ball(x0, rho);
    let part = partition_in(map, n, params.eta, &inner)?;
    let q_n: Vec<PartitionElement> = part
        .elements
        .into_par_iter()
        .filter(|e| {
            e.pullback
                .interval
                .linspace(MEMBERSHIP_WITNESSES)
                .any(|x| inner.contains(x) && constraints.contains(map, x))
        })
        .collect();
    if q_n.is_empty() {
        return Err(Error::NoConstrainedMass);
    }
    let q_n_mass: f64 = q_n.iter().map(|e| e.pullback.interval.len()).sum();
    let base_escapes = if n >= covering_time(map, rho, COVERING_GRID)? {
        Some(
            q_n.iter()
                .filter(|e| !base.contains_interval(&e.pullback.interval, 0.0))
                .count(),
        )
    } else {
        None
    };

    let kappa = params.kappa.unwrap_or(params.eta / 4.0);
    // Safe points are only needed when some element misses the trivial case.
    let needs_safe = q_n
        .iter()
        .any(|e| !(e.pullback.diffeomorphic && e.image.len() >= kappa));
    let safe_points = if needs_safe {
        safe_dense_set(map, params.alpha_safe, n, params.eta / 3.0, params.j_max)?
    } else {
        Vec::new()
    };
    let usl = UslParams {
        epsilon: params.epsilon / 4.0,
        eta: params.eta,
        kappa,
        c: params.c,
        alpha: params.alpha_safe,
        safe_points,
    };
    let found: Vec<Option<(Interval, usize)>> = q_n
        .par_iter()
        .map(|e| {
            uniform_scale_search(map, &e.pullback, &usl)
                .ok()
                .map(|r| (r.j, r.m))
        })
        .collect();
    let usl_failures = found.iter().filter(|r| r.is_none()).count();
    if usl_failures == q_n.len() {
        return Err(Error::SearchFailure(
            "the uniform scale search failed on every element of Q_n".into(),
        ));
    }

    // Majority extension time by mass, ties to the smaller time.
    let mut groups: Vec<(usize, usize, f64)> = Vec::new();
    for (e, r) in q_n.iter().zip(&found) {
        if let Some((_, m)) = r {
            match groups.iter_mut().find(|g| g.0 == *m) {
                Some(g) => {
                    g.1 += 1;
                    g.2 += e.pullback.interval.len();
                }
                None => groups.push((*m, 1, e.pullback.interval.len())),
            }
        }
    }
    groups.sort_by_key(|g| g.0);
    let p0 = groups
        .iter()
        .fold(None::<&(usize, usize, f64)>, |best, g| match best {
            Some(b) if b.2 >= g.2 => Some(b),
            _ => Some(g),
        })
        .map(|g| g.0)
        .expect("at least one search succeeded");

    let return_steps = covering_time(map, kappa, COVERING_GRID)?;
    let q = p0 + return_steps;
    let picks: Vec<Option<(Interval, Interval)>> = q_n
        .par_iter()
        .zip(&found)
        .map(|(e, r)| match r {
            Some((j, m)) if *m == p0 => {
                let pieces = pullbacks_in(map, base, q, j, DEFAULT_CAP).ok()?;
                pieces
                    .into_iter()
                    .filter(|p| {
                        p.diffeomorphic
                            && j.contains_interval(&p.interval, 0.0)
                            && base.contains_interval(&p.interval, 0.0)
                    })
                    .min_by(|a, b| a.interval.lo.total_cmp(&b.interval.lo))
                    .map(|p| (p.interval, e.pullback.interval))
            }
            _ => None,
        })
        .collect();
    let in_group = found.iter().filter(|r| matches!(r, Some((_, m)) if *m == p0)).count();
    let mut chosen: Vec<(Interval, Interval)> = picks.into_iter().flatten().collect();
    let missing = in_group - chosen.len();

    // Branches are whole components of f^{-q}(B), so two picks are equal or
    // disjoint. Keep one copy of each, and by length if rounding disagrees.
    chosen.sort_by(|a, b| a.0.lo.total_cmp(&b.0.lo).then(b.0.len().total_cmp(&a.0.len())));
    let mut branches: Vec<(Interval, Option<Interval>)> = Vec::new();
    for (l, w) in chosen {
        match branches.last_mut() {
            Some(last) if l.lo <= last.0.hi => {
                if l.len() > last.0.len() {
                    *last = (l, Some(w));
                }
            }
            _ => branches.push((l, Some(w))),
        }
    }
    if branches.is_empty() {
        return Err(Error::SearchFailure(format!(
            "no element of the majority group returns to the base in {return_steps} steps"
        )));
    }
    let trace = BuildTrace {
        route: Route::Pipeline,
        rho,
        q_n: q_n.len(),
        q_n_mass,
        groups,
        p0,
        return_steps,
        usl_failures,
        missing,
        base_escapes,
        unresolved: 0,
    };
    finish(map, constraints, *base, q, branches, params, trace)
}
