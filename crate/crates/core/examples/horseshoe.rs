//! Horseshoes: the two-branch example, a constrained build, verification
//! and a certificate round trip.

use ldp1d::horseshoe::{
    build_horseshoe, free_energy_lower_bound, verify_horseshoe, Constraint, ConstraintSet,
    HorseshoeCertificate, HorseshoeParams,
};
use ldp1d::maps::ObservableSpec;
use ldp1d::SmoothMap;

fn main() -> ldp1d::Result<()> {
    let f = SmoothMap::chebyshev();
    let p = HorseshoeParams {
        rho: Some(0.15),
        ..Default::default()
    };
    let hs = build_horseshoe(&f, &ConstraintSet::trivial(2), 0.5, &p)?;
    println!("q = {}, branches {:?}", hs.q, hs.branches);
    println!("bound {:.5}", free_energy_lower_bound(&hs)?);

    // Orbits whose time-10 average of x is at least 0.45, near x0 = 0.4.
    // Built from an `ObservableSpec` so the certificate can record it.
    let cs = ConstraintSet {
        constraints: vec![Constraint::from_spec(&f, ObservableSpec::Identity, 0.45)],
        n: 10,
    };
    let p = HorseshoeParams {
        rho: Some(0.05),
        ..Default::default()
    };
    let hs = build_horseshoe(&f, &cs, 0.4, &p)?;
    let report = verify_horseshoe(&f, &hs);
    println!("constrained: q = {}, {} branches, {}", hs.q, hs.branches.len(), report.summary());
    println!("bound {:.5}", free_energy_lower_bound(&hs)?);

    let cert = HorseshoeCertificate::new(&f, &hs, Some(report))?;
    let (_, back) = HorseshoeCertificate::from_json(&cert.to_json()?)?.load()?;
    println!("reloaded certificate verifies: {}", verify_horseshoe(&f, &back).passed());
    Ok(())
}
