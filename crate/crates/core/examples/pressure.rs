//! Pressure by periodic orbits and by the weighted Ulam operator.

use ldp1d::thermo::{pressure_periodic, pressure_ulam, DEFAULT_BINS};
use ldp1d::{Observable, SmoothMap};

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    for theta in [-1.0, 0.0, 1.0] {
        let psi = Observable::Identity.tilted_geometric(theta, &f);
        let a = pressure_periodic(&f, &psi, 14)?;
        let b = pressure_ulam(&f, &psi, DEFAULT_BINS)?;
        println!("P({theta}·x − log|Df|): periodic {a:.5}, ulam {b:.5}");
    }
    println!("topological entropy {:.5}", pressure_periodic(&f, &Observable::Zero, 14)?);
    Ok(())
}
