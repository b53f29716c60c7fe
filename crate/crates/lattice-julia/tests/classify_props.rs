use lattice_julia::classify::{
    classify_parameter, classify_point, equiv_condition_check, green_function, immediate_membership,
    BasinTestConfig, BasinVerdict, GreenValue, Membership,
};
use lattice_julia::{FamilyParams, SpherePoint};
use num_complex::Complex64;
use proptest::prelude::*;

fn cfg() -> BasinTestConfig {
    BasinTestConfig::default().with_max_iter(2000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn five_conditions_agree(re in -3.0f64..5.0, im in -4.0f64..4.0, d in 2u32..4) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let p = FamilyParams::new(d, Complex64::new(re, im)).unwrap();
        let report = equiv_condition_check(&p, &cfg()).unwrap();
        if let Some(ok) = report.consistent() {
            prop_assert!(ok, "{report:?}");
        }
    }

    #[test]
    fn critical_orbit_points_avoid_the_wrong_basin(re in -3.0f64..5.0, im in -4.0f64..4.0) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let p = FamilyParams::new(2, Complex64::new(re, im)).unwrap();
        let zero = immediate_membership(&p, SpherePoint::ZERO, &cfg()).unwrap();
        prop_assert_ne!(zero, Some(Membership::ImmediateInfinity));
        let w = SpherePoint::Finite(1.0 - p.lambda());
        let cv = immediate_membership(&p, w, &cfg()).unwrap();
        prop_assert_ne!(cv, Some(Membership::ImmediateOne));
    }

    #[test]
    fn green_function_is_multiplicative(re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let p = FamilyParams::new(2, Complex64::new(30.0, 0.0)).unwrap();
        let z = SpherePoint::new(re, im);
        prop_assume!(classify_point(&p, z, &cfg()).verdict == BasinVerdict::AttractedToOne);
        let g = |z| match green_function(&p, z, 400, &cfg()) {
            Ok(GreenValue::Value { g, .. }) => Some(g),
            _ => None,
        };
        if let (Some(a), Some(b)) = (g(z), g(p.eval_u(z))) {
            prop_assert!((b - 2.0 * a).abs() <= 1e-6 * b.abs().max(1e-300), "{a} {b}");
        }
    }

    #[test]
    fn depth_is_stable_under_larger_budget(re in -3.0f64..5.0, im in -4.0f64..4.0) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let p = FamilyParams::new(2, Complex64::new(re, im)).unwrap();
        let a = classify_parameter(&p, &cfg()).depth();
        let b = classify_parameter(&p, &cfg().with_max_iter(4000)).depth();
        if a.is_some() {
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn green_function_converges_as_budget_grows() {
    let p = FamilyParams::new(2, Complex64::new(4.0, 0.0)).unwrap();
    let z = SpherePoint::new(0.1, -0.2);
    let g = |k| match green_function(&p, z, k, &BasinTestConfig::default()).unwrap() {
        GreenValue::Value { g, .. } => g,
        GreenValue::Center => unreachable!(),
    };
    assert!((g(60) - g(400)).abs() < 1e-6);
}
