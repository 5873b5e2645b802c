//! Built-in and custom maps, Birkhoff sums and empirical measures.

use ldp1d::maps::{birkhoff_sum, empirical_measure};
use ldp1d::{Observable, SmoothMap};

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    println!("{}: f(0.3) = {}, Df(0.3) = {}", f.name(), f.eval(0.3)?, f.deriv(0.3)?);
    println!("turning points {:?}, laps {}", f.turning_points(), f.laps().len());

    let g = SmoothMap::from_json(r#"{"kind": "quadratic", "a": 3.9}"#)?;
    println!("{}: f(0.5) = {}", g.name(), g.apply(0.5));

    let x = 0.1234;
    let n = 1000;
    let s = birkhoff_sum(&f, &Observable::Identity, x, n)?;
    let mu = empirical_measure(&f, x, n)?;
    println!("S_n(x)/n = {:.6}, first moments {:?}", s / n as f64, mu.moments(3));
    Ok(())
}
