use serde::{Deserialize, Serialize};

use super::Interval;
use crate::error::{Error, Result};
use crate::numeric::invert_monotone;

/// A critical point `c` with order `ℓ > 1`: near `c` the map behaves like
/// `|x − c|^ℓ` up to smooth coordinate changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub c: f64,
    pub order: f64,
}

/// A maximal monotone branch of the map, bounded by consecutive turning
/// points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lap {
    pub domain: Interval,
    pub increasing: bool,
    pub image: Interval,
}

/// JSON form of a map definition.
///
/// Piecewise maps list every piece endpoint in `breakpoints`, starting at 0
/// and ending at 1. Piece `i` is `Σ_k coeffs[i][k]·(x − breakpoints[i])^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapSpec {
    Quadratic {
        a: f64,
    },
    Chebyshev,
    Tent,
    Piecewise {
        breakpoints: Vec<f64>,
        coeffs: Vec<Vec<f64>>,
        #[serde(default)]
        critical: Vec<CriticalPoint>,
    },
}

#[derive(Debug, Clone)]
enum Kind {
    Quadratic { a: f64 },
    Piecewise(Piecewise),
}

#[derive(Debug, Clone)]
struct Piecewise {
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
    dcoeffs: Vec<Vec<f64>>,
}

impl Piecewise {
    fn piece(&self, x: f64) -> usize {
        let inner = &self.breaks[1..self.breaks.len() - 1];
        inner.partition_point(|&b| b <= x)
    }

    fn value(&self, i: usize, x: f64) -> f64 {
        horner(&self.coeffs[i], x - self.breaks[i])
    }

    fn slope(&self, i: usize, x: f64) -> f64 {
        horner(&self.dcoeffs[i], x - self.breaks[i])
    }
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * t + k)
}

/// A piecewise-smooth self-map of `[0, 1]` with finitely many non-flat
/// critical points.
///
/// Immutable after construction. Besides the declared critical points the
/// map may have breakpoints where the derivative changes sign without
/// vanishing (the tent map at 1/2); these "turning breakpoints" are folds too
/// and every structural test treats them like critical points.
#[derive(Debug, Clone)]
pub struct SmoothMap {
    kind: Kind,
    spec: MapSpec,
    critical: Vec<CriticalPoint>,
    turning: Vec<f64>,
    laps: Vec<Lap>,
}

const CONTINUITY_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-9;

impl SmoothMap {
    /// `x ↦ a·x·(1 − x)` for `a ∈ (0, 4]`.
    pub fn quadratic(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 4.0) {
            return Err(Error::InvalidMap(format!(
                "quadratic parameter a = {a} must lie in (0, 4]"
            )));
        }
        let critical = vec![CriticalPoint { c: 0.5, order: 2.0 }];
        let mut map = Self {
            kind: Kind::Quadratic { a },
            spec: MapSpec::Quadratic { a },
            critical,
            turning: vec![0.5],
            laps: Vec::new(),
        };
        map.laps = map.compute_laps();
        Ok(map)
    }

    /// `4x(1 − x)`.
    pub fn chebyshev() -> Self {
        let mut m = Self::quadratic(4.0).expect("a = 4 is valid");
        m.spec = MapSpec::Chebyshev;
        m
    }

    /// Full tent map with constant slope ±2; Lebesgue measure is invariant.
    pub fn tent() -> Self {
        let mut m = Self::piecewise(vec![0.0, 0.5, 1.0], vec![vec![0.0, 2.0], vec![1.0, -2.0]], vec![])
            .expect("tent map is valid");
        m.spec = MapSpec::Tent;
        m
    }

    pub fn piecewise(
        breakpoints: Vec<f64>,
        coeffs: Vec<Vec<f64>>,
        critical: Vec<CriticalPoint>,
    ) -> Result<Self> {
        let spec = MapSpec::Piecewise {
            breakpoints: breakpoints.clone(),
            coeffs: coeffs.clone(),
            critical: critical.clone(),
        };
        let pw = validate_pieces(breakpoints, coeffs)?;
        let mut critical = critical;
        critical.sort_by(|a, b| a.c.total_cmp(&b.c));
        let mut map = Self {
            kind: Kind::Piecewise(pw),
            spec,
            critical,
            turning: Vec::new(),
            laps: Vec::new(),
        };
        map.validate_critical()?;
        map.turning = map.find_turning();
        map.laps = map.compute_laps();
        map.validate_range()?;
        Ok(map)
    }

    pub fn from_spec(spec: &MapSpec) -> Result<Self> {
        match spec {
            MapSpec::Quadratic { a } => Self::quadratic(*a),
            MapSpec::Chebyshev => Ok(Self::chebyshev()),
            MapSpec::Tent => Ok(Self::tent()),
            MapSpec::Piecewise {
                breakpoints,
                coeffs,
                critical,
            } => Self::piecewise(breakpoints.clone(), coeffs.clone(), critical.clone()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MapSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn name(&self) -> String {
        match &self.spec {
            MapSpec::Quadratic { a } => format!("quadratic({a})"),
            MapSpec::Chebyshev => "chebyshev".into(),
            MapSpec::Tent => "tent".into(),
            MapSpec::Piecewise { breakpoints, .. } => {
                format!("piecewise({} pieces)", breakpoints.len() - 1)
            }
        }
    }

    /// `f(x)`, rejecting points outside `[0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.apply(x))
    }

    /// `Df(x)`, rejecting points outside `[0, 1]`.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.df(x))
    }

    /// Unchecked `f(x)` clamped into `[0, 1]` to absorb round-off.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        let y = match &self.kind {
            Kind::Quadratic { a } => a * x * (1.0 - x),
            Kind::Piecewise(p) => p.value(p.piece(x), x),
        };
        y.clamp(0.0, 1.0)
    }

    /// Unchecked `Df(x)`. At a breakpoint the right-hand piece is used.
    #[inline]
    pub fn df(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic { a } => a * (1.0 - 2.0 * x),
            Kind::Piecewise(p) => p.slope(p.piece(x), x),
        }
    }

    pub fn iterate(&self, x: f64, n: usize) -> f64 {
        (0..n).fold(x, |y, _| self.apply(y))
    }

    /// `log|Df^n(x)| = Σ_{i<n} log|Df(f^i x)|`.
    pub fn log_abs_deriv_iter(&self, x: f64, n: usize) -> f64 {
        let mut y = x;
        let mut s = 0.0;
        for _ in 0..n {
            s += self.df(y).abs().ln();
            y = self.apply(y);
        }
        s
    }

    /// `Df^n(x)` as a product along the orbit.
    pub fn deriv_iter(&self, x: f64, n: usize) -> f64 {
        let mut y = x;
        let mut d = 1.0;
        for _ in 0..n {
            d *= self.df(y);
            y = self.apply(y);
        }
        d
    }

    pub fn critical_points(&self) -> &[CriticalPoint] {
        &self.critical
    }

    /// Sorted fold points: critical points and turning breakpoints.
    pub fn turning_points(&self) -> &[f64] {
        &self.turning
    }

    pub fn laps(&self) -> &[Lap] {
        &self.laps
    }

    /// Index of the lap containing `x`; a shared endpoint goes to the left lap.
    pub fn lap_index(&self, x: f64) -> usize {
        self.turning.partition_point(|&t| t < x)
    }

    /// The point of lap `lap` mapped to `y`, with `y` clamped into the lap
    /// image.
    pub fn inverse_on_lap(&self, lap: usize, y: f64) -> f64 {
        let l = &self.laps[lap];
        let y = y.clamp(l.image.lo, l.image.hi);
        match &self.kind {
            Kind::Quadratic { a } => {
                let u = y / a;
                let disc = (1.0 - 4.0 * u).max(0.0);
                // Rationalised form of (1 − √disc)/2, accurate near y = 0.
                let left = 2.0 * u / (1.0 + disc.sqrt());
                if l.increasing {
                    left.min(0.5)
                } else {
                    (1.0 - left).max(0.5)
                }
            }
            Kind::Piecewise(_) => invert_monotone(
                |x| self.apply(x),
                l.domain.lo,
                l.domain.hi,
                l.increasing,
                y,
            ),
        }
    }

    /// Image of an interval under one step, exact up to the root tolerance.
    pub fn image(&self, j: &Interval) -> Interval {
        let mut lo = self.apply(j.lo).min(self.apply(j.hi));
        let mut hi = self.apply(j.lo).max(self.apply(j.hi));
        for &t in &self.turning {
            if j.contains_interior(t) {
                let v = self.apply(t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        Interval { lo, hi }
    }

    fn compute_laps(&self) -> Vec<Lap> {
        let mut cuts = vec![0.0];
        cuts.extend(self.turning.iter().copied().filter(|&t| t > 0.0 && t < 1.0));
        cuts.push(1.0);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let domain = Interval { lo: w[0], hi: w[1] };
                let (a, b) = (self.apply(w[0]), self.apply(w[1]));
                Lap {
                    domain,
                    increasing: b >= a,
                    image: Interval::hull(a, b),
                }
            })
            .collect()
    }

    fn pieces(&self) -> Option<&Piecewise> {
        match &self.kind {
            Kind::Piecewise(p) => Some(p),
            Kind::Quadratic { .. } => None,
        }
    }

    fn validate_critical(&self) -> Result<()> {
        let p = self.pieces().expect("piecewise");
        for cp in &self.critical {
            if !(0.0..=1.0).contains(&cp.c) {
                return Err(Error::InvalidMap(format!("critical point {} outside [0, 1]", cp.c)));
            }
            if !(cp.order > 1.0) {
                return Err(Error::InvalidMap(format!(
                    "critical point {} has order {} <= 1",
                    cp.c, cp.order
                )));
            }
            let i = p.piece(cp.c);
            let mut slopes = vec![p.slope(i, cp.c)];
            if i > 0 && p.breaks[i] == cp.c {
                slopes.push(p.slope(i - 1, cp.c));
            }
            if slopes.iter().any(|d| d.abs() > ZERO_TOL) {
                return Err(Error::InvalidMap(format!(
                    "derivative does not vanish at declared critical point {}",
                    cp.c
                )));
            }
            if let Some(est) = self.estimate_order(cp.c) {
                if (est - cp.order).abs() > 0.25 {
                    return Err(Error::InvalidMap(format!(
                        "critical point {} declared with order {} but behaves like order {est:.3}",
                        cp.c, cp.order
                    )));
                }
            }
        }
        self.check_no_hidden_zeros(p)
    }

    /// Local order from `|Df(c + 2h)| / |Df(c + h)| ≈ 2^{ℓ−1}`.
    fn estimate_order(&self, c: f64) -> Option<f64> {
        let h = 1e-4;
        [1.0, -1.0].into_iter().find_map(|s: f64| {
            let (x1, x2) = (c + s * h, c + 2.0 * s * h);
            if !(0.0..=1.0).contains(&x2) {
                return None;
            }
            let (d1, d2) = (self.df(x1).abs(), self.df(x2).abs());
            (d1 > 0.0 && d2 > 0.0).then(|| 1.0 + (d2 / d1).log2())
        })
    }

    fn near_declared(&self, x: f64, tol: f64) -> bool {
        self.critical.iter().any(|cp| (cp.c - x).abs() <= tol)
    }

    fn check_no_hidden_zeros(&self, p: &Piecewise) -> Result<()> {
        const SAMPLES: usize = 4096;
        for i in 0..p.coeffs.len() {
            let (a, b) = (p.breaks[i], p.breaks[i + 1]);
            let h = (b - a) / SAMPLES as f64;
            let xs: Vec<f64> = (0..=SAMPLES).map(|k| a + k as f64 * h).collect();
            let ds: Vec<f64> = xs.iter().map(|&x| p.slope(i, x)).collect();
            let tol = 2.0 * h;
            for k in 0..SAMPLES {
                if ds[k] == 0.0 || ds[k].signum() != ds[k + 1].signum() {
                    let z = if ds[k] == 0.0 { xs[k] } else { xs[k + 1] };
                    if !self.near_declared(xs[k], tol) && !self.near_declared(z, tol) {
                        return Err(Error::InvalidMap(format!(
                            "derivative vanishes near x = {} which is not a declared critical point",
                            xs[k]
                        )));
                    }
                }
            }
            // Zeros without a sign change show up as local minima of |Df|.
            for k in 1..SAMPLES {
                let (l, m, r) = (ds[k - 1].abs(), ds[k].abs(), ds[k + 1].abs());
                if m <= l && m <= r && !self.near_declared(xs[k], tol) {
                    let (mut lo, mut hi) = (xs[k - 1], xs[k + 1]);
                    for _ in 0..100 {
                        let m1 = lo + (hi - lo) / 3.0;
                        let m2 = hi - (hi - lo) / 3.0;
                        if p.slope(i, m1).abs() < p.slope(i, m2).abs() {
                            hi = m2;
                        } else {
                            lo = m1;
                        }
                    }
                    let z = 0.5 * (lo + hi);
                    if p.slope(i, z).abs() <= ZERO_TOL && !self.near_declared(z, tol) {
                        return Err(Error::InvalidMap(format!(
                            "derivative vanishes at x = {z} which is not a declared critical point"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn find_turning(&self) -> Vec<f64> {
        let p = self.pieces().expect("piecewise");
        let mut t: Vec<f64> = self.critical.iter().map(|c| c.c).collect();
        for i in 1..p.coeffs.len() {
            let b = p.breaks[i];
            let (l, r) = (p.slope(i - 1, b), p.slope(i, b));
            if l != 0.0 && r != 0.0 && l.signum() != r.signum() {
                t.push(b);
            }
        }
        t.sort_by(f64::total_cmp);
        t.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        t
    }

    fn validate_range(&self) -> Result<()> {
        let p = self.pieces().expect("piecewise");
        for i in 0..p.coeffs.len() {
            let (a, b) = (p.breaks[i], p.breaks[i + 1]);
            for k in 0..=1024 {
                let x = a + (b - a) * k as f64 / 1024.0;
                let v = p.value(i, x);
                if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                    return Err(Error::InvalidMap(format!(
                        "f({x}) = {v} leaves [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_domain(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(x))
    }
}

fn validate_pieces(breaks: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Piecewise> {
    if breaks.len() < 2 || breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
        return Err(Error::InvalidMap(
            "breakpoints must start at 0 and end at 1".into(),
        ));
    }
    if breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidMap("breakpoints must increase strictly".into()));
    }
    if coeffs.len() != breaks.len() - 1 {
        return Err(Error::InvalidMap(format!(
            "{} pieces need {} coefficient lists, got {}",
            breaks.len() - 1,
            breaks.len() - 1,
            coeffs.len()
        )));
    }
    if coeffs.iter().any(|c| c.is_empty() || c.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidMap("empty or non-finite coefficients".into()));
    }
    let dcoeffs = coeffs
        .iter()
        .map(|c| {
            let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, &v)| k as f64 * v).collect();
            if d.is_empty() {
                vec![0.0]
            } else {
                d
            }
        })
        .collect();
    let pw = Piecewise {
        breaks,
        coeffs,
        dcoeffs,
    };
    for i in 1..pw.coeffs.len() {
        let b = pw.breaks[i];
        let (l, r) = (pw.value(i - 1, b), pw.value(i, b));
        if (l - r).abs() > CONTINUITY_TOL {
            return Err(Error::InvalidMap(format!(
                "map is discontinuous at breakpoint {b}: {l} vs {r}"
            )));
        }
    }
    Ok(pw)
}
