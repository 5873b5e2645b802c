use ldp1d::pullback::pullbacks;
use ldp1d::safety::{ball_radius, covering_sum, safety_balls};
use ldp1d::{Interval, SmoothMap};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn radii_shrink_in_n(alpha in 0.5f64..4.0, n in 1usize..1000, j in 1usize..10_000) {
        prop_assert!(ball_radius(alpha, n + 1, j) <= ball_radius(alpha, n, j));
    }

    #[test]
    fn safe_points_have_diffeomorphic_pullbacks(x in 0.0f64..1.0, n in 2usize..=9) {
        let f = SmoothMap::chebyshev();
        let q = safety_balls(&f, 2.0, n, 1000).unwrap();
        prop_assume!(q.is_safe(x));
        let r = (n as f64).powi(-2);
        let pbs = pullbacks(&f, &Interval::ball(x, r), n).unwrap();
        prop_assert!(pbs.iter().all(|p| p.diffeomorphic));
    }
}

#[test]
fn safe_sets_shrink_in_n() {
    let f = SmoothMap::chebyshev();
    let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
    let mut prev = vec![false; grid.len()];
    for n in 2..=20 {
        let q = safety_balls(&f, 2.0, n, 1000).unwrap();
        let now: Vec<bool> = grid.iter().map(|&x| q.is_safe(x)).collect();
        assert!(prev.iter().zip(&now).all(|(p, c)| !p || *c), "n = {n}");
        prev = now;
    }
}

#[test]
fn covering_sum_vanishes_above_the_dimension_bound() {
    // β = 0.6 > 1/α = 0.5.
    let f = SmoothMap::chebyshev();
    let sums: Vec<f64> = [10, 100, 1000, 10_000]
        .iter()
        .map(|&n| covering_sum(&f, 2.0, 0.6, n, 100_000).unwrap().total)
        .collect();
    assert!(sums.windows(2).all(|w| w[1] < w[0]), "{sums:?}");
    assert!(covering_sum(&f, 2.0, 0.5, 10, 100).unwrap().divergent);
}
