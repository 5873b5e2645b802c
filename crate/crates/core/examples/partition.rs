//! The partition P_n(η) and its exhaustive checks, then the ratio-growth
//! diagnostic on the same elements.

use ldp1d::pullback::{partition_pn, ratio_growth};
use ldp1d::SmoothMap;

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    for n in [4, 8, 12] {
        let p = partition_pn(&f, n, 0.1)?;
        let c = p.check(100_000);
        println!(
            "n = {n}: {} elements, max neighbours {}, holds {}",
            p.elements.len(),
            c.max_neighbours,
            c.holds()
        );
    }
    for n in [4, 10, 16] {
        let r = ratio_growth(&f, n, 0.1, 0.1, 9)?;
        println!(
            "ratio growth n = {n}: {} pairs, {} violations, worst log excess {:.4}",
            r.pairs, r.violations, r.worst_excess
        );
    }
    Ok(())
}
