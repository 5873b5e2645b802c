use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{Interval, MapSpec, ObservableSpec};
use crate::thermo::DEFAULT_BINS;

/// Allowed gap between empirical and predicted rate: the larger of `abs`
/// and `rel·|predicted|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 0.05, rel: 0.15 }
    }
}

impl Tolerance {
    pub fn allowed(&self, predicted: f64) -> f64 {
        self.abs.max(self.rel * predicted.abs())
    }
}

/// Where and how long to look for a horseshoe inside the window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HorseshoeProbe {
    pub x0: f64,
    pub n: usize,
    #[serde(default)]
    pub rho: Option<f64>,
}

/// Everything `ldp_report` and the CLI need. Every field has a default, so
/// `{}` is a valid config for the chebyshev map and the identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapSpec,
    pub observable: ObservableSpec,
    pub window: Interval,
    pub n_list: Vec<usize>,
    /// Midpoint-grid size for the deviation volumes.
    pub samples: usize,
    /// Horizon and sample count of the grid-mc SCGF estimator.
    pub scgf_n: usize,
    pub scgf_samples: usize,
    /// Jitter seed for grid-mc; `None` uses cell midpoints.
    pub seed: Option<u64>,
    pub bins: usize,
    pub theta_half_width: f64,
    pub theta_count: usize,
    /// Largest period scanned for `[c_φ, d_φ]`.
    pub range_period: usize,
    pub tolerance: Tolerance,
    pub horseshoe: Option<HorseshoeProbe>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            map: MapSpec::Chebyshev,
            observable: ObservableSpec::Identity,
            window: Interval { lo: 0.0, hi: 0.35 },
            n_list: vec![10, 15, 20, 25, 30, 35, 40],
            samples: 1_000_000,
            scgf_n: 25,
            scgf_samples: 1_000_000,
            seed: None,
            bins: DEFAULT_BINS,
            theta_half_width: 8.0,
            theta_count: 201,
            range_period: 12,
            tolerance: Tolerance::default(),
            horseshoe: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window.lo <= self.window.hi) {
            return Err(Error::arg("window must have lo <= hi"));
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(Error::arg("n_list must be nonempty with horizons >= 1"));
        }
        if self.samples == 0 || self.scgf_samples == 0 || self.scgf_n == 0 {
            return Err(Error::arg("sample counts and horizons must be positive"));
        }
        if self.theta_count < 3 || !(self.theta_half_width > 0.0) {
            return Err(Error::arg("theta grid needs at least 3 points and a positive width"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c.n_list, vec![10, 15, 20, 25, 30, 35, 40]);
        assert_eq!(c.samples, 1_000_000);
        assert_eq!(c.map, MapSpec::Chebyshev);
    }

    #[test]
    fn round_trip_and_overrides() {
        let text = r#"{"map": {"kind": "quadratic", "a": 3.9},
                       "observable": {"polynomial": [0, 1, -1]},
                       "window": {"lo": 0.1, "hi": 0.2}, "samples": 1000}"#;
        let c = RunConfig::from_json(text).unwrap();
        assert_eq!(c.observable, ObservableSpec::Polynomial(vec![0.0, 1.0, -1.0]));
        assert_eq!(c.samples, 1000);
        let back = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back.window, c.window);
        assert!(RunConfig::from_json(r#"{"sample": 3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"n_list": []}"#).is_err());
    }
}
