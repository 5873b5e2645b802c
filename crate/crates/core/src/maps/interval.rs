use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`.
///
/// `Interval::new` enforces containment in `[0, 1]`; `Interval::span` only
/// requires `lo <= hi` and is used for the geometric helpers (cross-ratios of
/// arbitrary nested pairs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::arg(format!("[{lo}, {hi}] is not an interval")));
        }
        if lo < 0.0 || hi > 1.0 {
            return Err(Error::arg(format!("[{lo}, {hi}] is not contained in [0, 1]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn span(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::arg(format!("[{lo}, {hi}] is not an interval")));
        }
        Ok(Self { lo, hi })
    }

    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    /// `B(x, r) ∩ [0, 1]`, closed.
    pub fn ball(x: f64, r: f64) -> Self {
        Self {
            lo: (x - r).max(0.0),
            hi: (x + r).min(1.0),
        }
    }

    /// Interval spanned by two points in either order.
    pub(crate) fn hull(a: f64, b: f64) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// `other ⊆ self` up to `tol` at both ends.
    pub fn contains_interval(&self, other: &Interval, tol: f64) -> bool {
        other.lo >= self.lo - tol && other.hi <= self.hi + tol
    }

    /// Interiors overlap by more than `slack`.
    pub fn overlaps(&self, other: &Interval, slack: f64) -> bool {
        self.lo.max(other.lo) < self.hi.min(other.hi) - slack
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Points `lo + (k + 1/2)·len/count`, `k = 0..count`.
    pub fn midpoints(&self, count: usize) -> impl Iterator<Item = f64> + '_ {
        let h = self.len() / count as f64;
        (0..count).map(move |k| self.lo + (k as f64 + 0.5) * h)
    }

    /// `count >= 2` points including both endpoints.
    pub fn linspace(&self, count: usize) -> impl Iterator<Item = f64> + '_ {
        let h = self.len() / (count - 1).max(1) as f64;
        (0..count).map(move |k| {
            if k + 1 == count {
                self.hi
            } else {
                self.lo + k as f64 * h
            }
        })
    }

    /// The closed middle third.
    pub fn middle_third(&self) -> Interval {
        let t = self.len() / 3.0;
        Interval {
            lo: self.lo + t,
            hi: self.hi - t,
        }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:.6}, {:.6}]", self.lo, self.hi)
    }
}
