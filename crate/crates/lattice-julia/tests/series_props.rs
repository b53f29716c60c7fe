use lattice_julia::series::{
    average, corollary_vanishing, modular_lemma_check, pointwise_tables, u1_at, AverageContext, CirclePoint,
    SeriesConfig,
};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn average_is_linear(
        q in prop::sample::select(vec![-2i64, -3]),
        n in 2u32..=5,
        k in -6i64..=6,
        a_re in -2.0f64..2.0,
        a_im in -2.0f64..2.0,
        b in -3.0f64..3.0,
        c in -3.0f64..3.0,
    ) {
        let ctx = AverageContext::new(q, n).unwrap();
        let cfg = SeriesConfig::for_degree(q.unsigned_abs() as u32).unwrap();
        let a = Complex64::new(a_re, a_im);
        let g1 = |p: CirclePoint| p.pow(k).value();
        let g2 = |p: CirclePoint| u1_at(p, &cfg);
        let combined = average(|p| a * g1(p) + b * g2(p), &ctx);
        let separate = a * average(g1, &ctx) + b * average(g2, &ctx);
        prop_assert!((combined - separate).norm() < 1e-12);
        let constant = average(|_| Complex64::new(c, -c), &ctx);
        prop_assert!((constant - Complex64::new(c, -c)).norm() < 1e-13);
    }

    #[test]
    fn modular_lemma_holds(q in prop::sample::select(vec![-2i64, -3, -4, -5]), n in 1u32..=9) {
        prop_assume!((q, n) != (-2, 2));
        let r = modular_lemma_check(q, n, 2 * n + 2).unwrap();
        prop_assert!(r.passed(), "{:?}", r.counterexamples);
    }
}

// q^2 - 1 = 3 and q ≡ 1 (mod 3): every power of q coincides, so part (3)
// fails and the orbit averages collapse.
#[test]
fn quadratic_period_two_is_a_counterexample() {
    let r = modular_lemma_check(-2, 2, 6).unwrap();
    assert!(r.no_power_vanishes && r.no_sum_vanishes);
    assert!(!r.differences_match_period);
    let cfg = SeriesConfig::for_degree(2).unwrap();
    assert!(pointwise_tables(-2, 2, &cfg).unwrap().iter().any(|r| !r.passes(1e-10)));
    for n in (1..=40).filter(|&n| n != 2) {
        assert!(modular_lemma_check(-2, n, 2 * n + 2).unwrap().passed(), "n = {n}");
    }
}

#[test]
fn vanishing_and_pointwise_tables_across_periods() {
    for (q, ns) in [(-2i64, 3..=7u32), (-3, 2..=4), (-4, 2..=3)] {
        let cfg = SeriesConfig::for_degree(q.unsigned_abs() as u32).unwrap();
        for n in ns {
            for r in corollary_vanishing(q, n, &cfg).unwrap() {
                assert!(r.passes(1e-10), "{}", r.to_line());
            }
            for r in pointwise_tables(q, n, &cfg).unwrap() {
                assert!(r.passes(1e-10), "{}", r.to_line());
            }
        }
    }
}
