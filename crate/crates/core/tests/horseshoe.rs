use ldp1d::horseshoe::{
    build_horseshoe, free_energy_lower_bound, katok_blocks, verify_horseshoe, ConstraintSet,
    HorseshoeParams, KatokTarget,
};
use ldp1d::thermo::{measure_stats_periodic, measure_stats_ulam, ulam_operator, DEFAULT_BINS};
use ldp1d::{Observable, SmoothMap};

#[test]
fn built_horseshoes_verify_and_bound_free_energy() {
    let f = SmoothMap::chebyshev();
    for x0 in [0.3, 0.4, 0.5, 0.6] {
        for n in 2..=6 {
            let hs = build_horseshoe(&f, &ConstraintSet::trivial(n), x0, &HorseshoeParams::default()).unwrap();
            let report = verify_horseshoe(&f, &hs);
            assert!(report.passed(), "x0 = {x0}, n = {n}: {}", report.summary());
            assert!(free_energy_lower_bound(&hs).unwrap() <= 0.05);
        }
    }
    let cs = ConstraintSet::single(Observable::Identity, 0.45, 10);
    let p = HorseshoeParams {
        rho: Some(0.05),
        ..Default::default()
    };
    let hs = build_horseshoe(&f, &cs, 0.4, &p).unwrap();
    assert!(verify_horseshoe(&f, &hs).passed());
    assert!(free_energy_lower_bound(&hs).unwrap() <= 0.05);
}

#[test]
fn unconstrained_family_approaches_the_acip() {
    let f = SmoothMap::chebyshev();
    let op = ulam_operator(&f, DEFAULT_BINS, &Observable::Zero).unwrap();
    let acip = measure_stats_ulam(&op).unwrap().free_energy;
    let mut prev = f64::NEG_INFINITY;
    for q in 2..=10 {
        let hs = build_horseshoe(&f, &ConstraintSet::trivial(q), 0.5, &HorseshoeParams::default()).unwrap();
        let bound = free_energy_lower_bound(&hs).unwrap();
        assert!(bound <= acip + 0.05, "q = {q}: {bound}");
        assert!(bound >= prev - 1e-12, "q = {q}: {bound} < {prev}");
        prev = bound;
    }
}

#[test]
fn period_two_katok_block() {
    let f = SmoothMap::chebyshev();
    let p = (5.0 - 5f64.sqrt()) / 8.0;
    let target = KatokTarget {
        stats: measure_stats_periodic(&f, p, 2).unwrap(),
        integrals: vec![0.625],
    };
    let kb = katok_blocks(&f, &target, &[Observable::Identity], 0.1).unwrap();
    assert_eq!((kb.k, kb.m), (1, 2));
    assert!(kb.set.contains(p) && kb.blocks[0].contains(p));
    assert!(kb.blocks[0].hi - kb.blocks[0].lo < kb.set.hi - kb.set.lo);
}
