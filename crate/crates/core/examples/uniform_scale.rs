//! Uniform scale search on every element of a partition.
//!
//! The trivial case returns the middle third of `W`, so the length clause
//! `|J| ≥ e^{−εn}|W|` needs `εn ≥ log 3`; with `ε = 0.1` that is `n ≥ 11`.
//! Folded elements go through a safe ball of radius `n^{−2}` and at `n = 12`
//! the resulting `J` is still too short for the length clause.

use ldp1d::pullback::{partition_pn, uniform_scale_search, UslParams};
use ldp1d::safety::{safe_dense_set, DEFAULT_J_MAX};
use ldp1d::SmoothMap;

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    let (n, eta) = (12, 0.1);
    let params = UslParams {
        epsilon: 0.1,
        eta,
        kappa: eta / 4.0,
        c: 3.0,
        alpha: 2.0,
        safe_points: safe_dense_set(&f, 2.0, n, eta / 4.0, DEFAULT_J_MAX)?,
    };
    let p = partition_pn(&f, n, eta)?;
    let (mut ok, mut extended, mut clause, mut errors) = (0, 0, 0, 0);
    for e in &p.elements {
        match uniform_scale_search(&f, &e.pullback, &params) {
            Ok(r) if r.certificate.all() => {
                ok += 1;
                extended += usize::from(r.m > n);
            }
            Ok(_) => clause += 1,
            Err(_) => errors += 1,
        }
    }
    println!(
        "{} elements: {ok} certified ({extended} needed m > n), {clause} failed a clause, {errors} searches failed",
        p.elements.len()
    );
    Ok(())
}
