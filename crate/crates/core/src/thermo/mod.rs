//! Periodic orbits, the Ulam transfer operator, pressure, free energy,
//! cumulant generating functions and their Legendre transforms.

mod legendre;
mod periodic;
mod scgf;
mod ulam;

pub use legendre::{
    conjugate, legendre_rate, legendre_rate_with, lower_hull, RateTable, CONVEXITY_TOL,
    DEFAULT_T_POINTS,
};
pub use periodic::{
    measure_stats_periodic, observable_range, periodic_orbits, periodic_points,
    periodic_points_capped, pressure_periodic, ObservableRange, PeriodicOrbit,
};
pub use scgf::{
    default_theta_grid, grid_sums, lambda_from_sums, scgf, scgf_curve, theta_grid, ScgfMethod,
};
pub use ulam::{
    bin_midpoint, block_entropy, invariant_density, measure_stats_ulam, measure_stats_ulam_with,
    pressure_ulam, ulam_operator, InvariantDensity, LeadingEigen, UlamOperator, DEFAULT_BINS,
    EIGEN_TOL, ENTROPY_BLOCK, MAX_POWER_STEPS,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::maps::{Observable, SmoothMap};

/// Lyapunov exponent, entropy and free energy `F = h − λ` of an invariant
/// measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureStats {
    pub lyapunov: f64,
    pub entropy: f64,
    pub free_energy: f64,
    pub support: Support,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Support {
    PeriodicOrbit { points: Vec<f64> },
    UlamDensity { bins: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PressureMethod {
    /// `(1/n) log Σ_{f^n p = p} e^{S_nψ(p)}`; the parameter is `n`.
    Periodic,
    /// Leading eigenvalue of the weighted Ulam operator; the parameter is
    /// the bin count.
    Ulam,
}

pub fn pressure(
    map: &SmoothMap,
    psi: &Observable,
    method: PressureMethod,
    n_or_bins: usize,
) -> Result<f64> {
    match method {
        PressureMethod::Periodic => pressure_periodic(map, psi, n_or_bins),
        PressureMethod::Ulam => pressure_ulam(map, psi, n_or_bins),
    }
}
