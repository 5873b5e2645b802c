//! Invariant density from the Ulam operator, against the arcsine law.

use std::f64::consts::PI;

use ldp1d::thermo::{bin_midpoint, invariant_density, measure_stats_ulam, ulam_operator, DEFAULT_BINS};
use ldp1d::{Interval, Observable, SmoothMap};

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    let op = ulam_operator(&f, DEFAULT_BINS, &Observable::Zero)?;
    let d = invariant_density(&op)?;
    let arcsine = |x: f64| 1.0 / (PI * (x * (1.0 - x)).sqrt());
    let l1 = d.l1_distance(arcsine, &Interval::new(0.05, 0.95)?);
    println!("L1 distance to the arcsine density on [0.05, 0.95]: {l1:.5}");
    for i in [100, 1024, 2048] {
        let x = bin_midpoint(i, DEFAULT_BINS);
        println!("  density at {x:.4}: {:.4} (exact {:.4})", d.density(i), arcsine(x));
    }
    let s = measure_stats_ulam(&op)?;
    println!("acip: h = {:.5}, λ = {:.5}, F = {:.5}", s.entropy, s.lyapunov, s.free_energy);
    Ok(())
}
