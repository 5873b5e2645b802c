use ldp1d::maps::{birkhoff_sum, empirical_measure};
use ldp1d::{Observable, SmoothMap};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn iterates_stay_in_unit_interval(a in 0.1f64..=4.0, x in 0.0f64..=1.0, n in 1usize..200) {
        let f = SmoothMap::quadratic(a).unwrap();
        let mut y = x;
        for _ in 0..n {
            y = f.apply(y);
            prop_assert!((0.0..=1.0).contains(&y));
        }
    }

    #[test]
    fn empirical_integral_is_birkhoff_average(x in 0.0f64..=1.0, n in 1usize..300, c in prop::collection::vec(-2.0f64..2.0, 1..5)) {
        let f = SmoothMap::chebyshev();
        let phi = Observable::Polynomial(c);
        let mu = empirical_measure(&f, x, n).unwrap();
        let s = birkhoff_sum(&f, &phi, x, n).unwrap();
        prop_assert!((mu.integrate(&phi) - s / n as f64).abs() <= 1e-10);
        prop_assert!((mu.total_mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn quadratic_derivative_is_affine(a in 0.1f64..=4.0, x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        // Df(x) = a(1 − 2x): Hölder with β = 1 and H = 2a.
        let f = SmoothMap::quadratic(a).unwrap();
        let d = (f.df(x) - f.df(y)).abs();
        prop_assert!(d <= 2.0 * a * (x - y).abs() + 1e-12);
        prop_assert!((f.df(x) - a * (1.0 - 2.0 * x)).abs() <= 1e-12);
    }
}

#[test]
fn quadratic_critical_set() {
    for a in [0.5, 2.0, 3.7, 4.0] {
        let f = SmoothMap::quadratic(a).unwrap();
        let crit = f.critical_points();
        assert_eq!(crit.len(), 1);
        assert_eq!((crit[0].c, crit[0].order), (0.5, 2.0));
    }
}

#[test]
fn tent_holder_constant_is_zero_off_the_fold() {
    let f = SmoothMap::tent();
    assert_eq!(f.df(0.1), f.df(0.4));
    assert_eq!(f.df(0.6), -2.0);
}
