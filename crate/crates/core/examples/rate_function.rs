//! Cumulant generating function and its Legendre transform.

use ldp1d::thermo::{
    default_theta_grid, legendre_rate, observable_range, scgf_curve, ScgfMethod,
};
use ldp1d::{Interval, Observable, SmoothMap};

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    let phi = Observable::Identity;
    let thetas = default_theta_grid();
    let range = observable_range(&f, &phi, 12)?;
    for (name, method) in [("grid-mc", ScgfMethod::grid(25, 1_000_000)), ("ulam", ScgfMethod::ulam())] {
        let lambda = scgf_curve(&f, &phi, &thetas, &method)?;
        let q = legendre_rate(&thetas, &lambda)?.with_range(range.c_lo, range.d_hi);
        println!(
            "{name}: mean {:.4}, q(0.2) = {:.4}, q(0.7) = {:.4}, q(0.8) = {}, inf over [0, 0.35] = {:.4}",
            q.mean(),
            q.rate(0.2),
            q.rate(0.7),
            q.rate(0.8),
            q.inf_over(&Interval::new(0.0, 0.35)?)
        );
    }
    Ok(())
}
