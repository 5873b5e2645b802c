//! Safety balls around the critical orbit, safe points and the covering
//! sum.

use ldp1d::safety::{covering_sum, is_alpha_safe, safe_dense_set, safety_balls, DEFAULT_J_MAX};
use ldp1d::SmoothMap;

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    let q = safety_balls(&f, 2.0, 10, DEFAULT_J_MAX)?;
    for iv in q.closed_union() {
        println!("E_10(2) piece {iv}");
    }
    println!("0.005 safe: {}", is_alpha_safe(&f, 0.005, 2.0, 10, DEFAULT_J_MAX)?);
    println!("0.3 safe: {}", is_alpha_safe(&f, 0.3, 2.0, 10, DEFAULT_J_MAX)?);
    println!("safe points at scale 0.1: {:?}", safe_dense_set(&f, 2.0, 10, 0.1, DEFAULT_J_MAX)?);
    for n in [10, 100, 1000, 10_000] {
        let s = covering_sum(&f, 2.0, 1.0, n, DEFAULT_J_MAX)?;
        println!("covering sum n = {n}: {:.6e}", s.total);
    }
    Ok(())
}
