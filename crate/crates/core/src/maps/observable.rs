use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SmoothMap;

/// A real function on `[0, 1]` with a declared Lipschitz bound.
///
/// `LogAbsDeriv` is `log|Df|`, which is `−∞` at critical points; its
/// Lipschitz bound is reported as `+∞`.
#[derive(Clone)]
pub enum Observable {
    Zero,
    Identity,
    /// `Σ c_k x^k`.
    Polynomial(Vec<f64>),
    LogAbsDeriv(SmoothMap),
    /// `Σ w_i φ_i`.
    Combination(Vec<(f64, Observable)>),
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lip: f64,
    },
}

impl Observable {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, lip: f64) -> Self {
        Observable::Custom { f: Arc::new(f), lip }
    }

    pub fn log_abs_deriv(map: &SmoothMap) -> Self {
        Observable::LogAbsDeriv(map.clone())
    }

    /// `θ·self − log|Df|`, the potential behind the Lebesgue-weighted
    /// cumulant generating function.
    pub fn tilted_geometric(&self, theta: f64, map: &SmoothMap) -> Self {
        Observable::Combination(vec![
            (theta, self.clone()),
            (-1.0, Observable::log_abs_deriv(map)),
        ])
    }

    pub fn scaled(&self, w: f64) -> Self {
        Observable::Combination(vec![(w, self.clone())])
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Observable::Zero => 0.0,
            Observable::Identity => x,
            Observable::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &k| acc * x + k),
            Observable::LogAbsDeriv(m) => m.df(x).abs().ln(),
            Observable::Combination(terms) => terms
                .iter()
                .filter(|(w, _)| *w != 0.0)
                .map(|(w, o)| w * o.eval(x))
                .sum(),
            Observable::Custom { f, .. } => f(x),
        }
    }

    /// Declared Lipschitz constant on `[0, 1]`.
    pub fn lip_bound(&self) -> f64 {
        match self {
            Observable::Zero => 0.0,
            Observable::Identity => 1.0,
            Observable::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, v)| k as f64 * v.abs())
                .sum(),
            Observable::LogAbsDeriv(_) => f64::INFINITY,
            Observable::Combination(terms) => terms
                .iter()
                .filter(|(w, _)| *w != 0.0)
                .map(|(w, o)| w.abs() * o.lip_bound())
                .sum(),
            Observable::Custom { lip, .. } => *lip,
        }
    }

    /// Sampled `(min, max)` over a uniform grid of `[0, 1]`.
    pub fn sampled_range(&self, samples: usize) -> (f64, f64) {
        (0..=samples)
            .map(|k| self.eval(k as f64 / samples as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Zero => write!(f, "Zero"),
            Observable::Identity => write!(f, "Identity"),
            Observable::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            Observable::LogAbsDeriv(m) => write!(f, "LogAbsDeriv({})", m.name()),
            Observable::Combination(t) => f.debug_list().entries(t.iter()).finish(),
            Observable::Custom { lip, .. } => write!(f, "Custom(lip = {lip})"),
        }
    }
}

/// Config-file form of an observable: `"identity"`, `"log-deriv"` or
/// `{"polynomial": [c0, c1, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableSpec {
    Identity,
    LogDeriv,
    Polynomial(Vec<f64>),
}

impl ObservableSpec {
    pub fn build(&self, map: &SmoothMap) -> Observable {
        match self {
            ObservableSpec::Identity => Observable::Identity,
            ObservableSpec::LogDeriv => Observable::log_abs_deriv(map),
            ObservableSpec::Polynomial(c) => Observable::Polynomial(c.clone()),
        }
    }
}
