//! Deviation volumes, the fitted rate and both predictions for one window.
//! Pass an output directory to write the CSV tables and report.

use ldp1d::harness::{ldp_report, DeviationExperiment, RunConfig};
use ldp1d::{Interval, Observable, SmoothMap};

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    let j = Interval::new(0.0, 0.35)?;
    let e = DeviationExperiment::run(&f, &Observable::Identity, j, &[5, 10, 20], 100_000)?;
    for p in &e.results {
        println!("n = {}: volume {:.3e}", p.n, p.volume);
    }

    let report = ldp_report(&f, &Observable::Identity, &j, &RunConfig::default())?;
    println!("{}", serde_json::to_string_pretty(&report.summary())?);
    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir)?;
        report.write_outputs(dir.as_ref())?;
    }
    Ok(())
}
