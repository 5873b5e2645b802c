//! Blocks realising a periodic measure and the acip.

use ldp1d::horseshoe::{katok_blocks, KatokTarget};
use ldp1d::thermo::{measure_stats_periodic, measure_stats_ulam, ulam_operator, DEFAULT_BINS};
use ldp1d::{Observable, SmoothMap};

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    let phi = [Observable::Identity];

    let fixed = KatokTarget {
        stats: measure_stats_periodic(&f, 0.75, 1)?,
        integrals: vec![0.75],
    };
    let kb = katok_blocks(&f, &fixed, &phi, 0.1)?;
    println!("fixed point: K = {}, blocks {:?}", kb.set, kb.blocks);

    let op = ulam_operator(&f, DEFAULT_BINS, &Observable::Zero)?;
    let acip = KatokTarget {
        stats: measure_stats_ulam(&op)?,
        integrals: vec![0.5],
    };
    let kb = katok_blocks(&f, &acip, &phi, 0.3)?;
    println!(
        "acip: K = {}, k = {}, m = {}, (1/m) log k = {:.4}",
        kb.set,
        kb.k,
        kb.m,
        kb.entropy_rate()
    );
    Ok(())
}
