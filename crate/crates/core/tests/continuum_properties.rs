use kantian_core::continuum::{
    self, multipliers_from_constants, Candidate, ContinuumLQ, QuadratureConstants, XiProfile,
};
use kantian_core::scenarios;
use proptest::prelude::*;

proptest! {
    #[test]
    fn unit_weight_multipliers_are_equal(c in 0.0f64..10.0, ub in -2.0f64..2.0) {
        let m = multipliers_from_constants(QuadratureConstants { c1: c, c2: c, c3: c }, ub).unwrap();
        prop_assert!((m.chi2 - m.p1).abs() < 1e-12);
        prop_assert!((m.chi2 - c / (2.0 * c + 2.0) * (1.0 - ub)).abs() < 1e-12);
    }

    #[test]
    fn continuum_solutions_satisfy_their_conditions(alpha in 0.0f64..=1.0, which in 0usize..3, windowed: bool) {
        let xi = [XiProfile::Constant, XiProfile::Linear, XiProfile::Affine][which];
        let lq = if windowed {
            ContinuumLQ::windowed(alpha, xi, 61).unwrap()
        } else {
            ContinuumLQ::uniform_kernel(alpha, xi, 61).unwrap()
        };
        let sol = continuum::solve(&lq).unwrap();
        prop_assert!(continuum::pontryagin_residual(&lq, &Candidate::from(&sol)).unwrap() < 1e-12);
        prop_assert!(sol.actions.iter().all(|u| (0.0..=1.0).contains(u)));
    }

    #[test]
    fn uniform_constant_efficiency_matches_the_symmetric_curve(alpha in 0.0f64..=1.0) {
        let lq = ContinuumLQ::uniform_kernel(alpha, XiProfile::Constant, 41).unwrap();
        let sol = continuum::solve(&lq).unwrap();
        let u = scenarios::symmetric_reference(alpha).kantian;
        prop_assert!(sol.actions.iter().all(|x| (x - u).abs() < 1e-12));
    }
}

#[test]
fn larger_groups_fish_less() {
    let mut prev = f64::INFINITY;
    for i in 0..=10 {
        let sc = scenarios::continuum_windowed(i as f64 / 10.0, XiProfile::Affine, 101).unwrap();
        let sol = continuum::solve(&sc.lq).unwrap();
        let total: f64 = sol.actions.iter().sum();
        assert!(total < prev);
        prev = total;
    }
}
