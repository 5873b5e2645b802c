//! Pull-backs of an interval by iterates, by the preimage tree and by
//! forward laps, with distortion and the critical graph.

use ldp1d::pullback::{critical_graph, distortion, iterate_laps, pullbacks, DEFAULT_CAP};
use ldp1d::{Interval, SmoothMap};

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    let u = Interval::new(0.6, 0.7)?;
    for n in 1..=4 {
        let pbs = pullbacks(&f, &u, n)?;
        let folded = pbs.iter().filter(|p| !p.diffeomorphic).count();
        println!("n = {n}: {} components, {folded} folded", pbs.len());
    }
    for p in pullbacks(&f, &u, 2)? {
        let d = distortion(&f, &p.interval, 2, 65)?;
        println!("  {} -> {}, distortion {d:.4}", p.interval, p.target);
    }
    println!("f^5 has {} laps", iterate_laps(&f, 5, DEFAULT_CAP)?.len());

    // f(1/2) = 1 and 1 is fixed away from 1/2: no edges.
    let g = critical_graph(&f, 50)?;
    println!("critical graph: {} edges, E = {}", g.edges.len(), g.e);
    Ok(())
}
