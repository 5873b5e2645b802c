//! Periodic points and orbits, their Lyapunov exponents and free energy.

use ldp1d::thermo::{measure_stats_periodic, observable_range, periodic_orbits, periodic_points};
use ldp1d::{Observable, SmoothMap};

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    for n in [4, 8, 12, 16] {
        let k = periodic_points(&f, n)?.len();
        println!("#Fix(f^{n}) = {k}, log/n = {:.6}", (k as f64).ln() / n as f64);
    }
    for o in periodic_orbits(&f, 3)? {
        let s = measure_stats_periodic(&f, o.points[0], 3)?;
        println!("period 3 orbit {:?}: λ = {:.5}, F = {:.5}", o.points, s.lyapunov, s.free_energy);
    }
    let r = observable_range(&f, &Observable::Identity, 12)?;
    println!("orbit averages of x lie in [{}, {}]", r.c_lo, r.d_hi);
    Ok(())
}
