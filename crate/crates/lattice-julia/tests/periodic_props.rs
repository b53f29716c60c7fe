use lattice_julia::periodic::{
    asymptotic_dimension, bowen_dimension, default_n_max, default_period, ifs_bounds, julia_circle_deviation,
    periodic_points, pressure_sum, PeriodicConfig,
};
use lattice_julia::{FamilyParams, RescaledMap};
use num_complex::Complex64;
use proptest::prelude::*;

fn map(d: u32, alpha: Complex64) -> RescaledMap {
    RescaledMap::new(d, alpha).unwrap()
}

/// All roots of a monic polynomial (coefficients from the constant term up)
/// by simultaneous Weierstrass iteration.
fn monic_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.len();
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(1.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        for i in 0..deg {
            let denom: Complex64 = (0..deg).filter(|&j| j != i).map(|j| roots[i] - roots[j]).product();
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
        }
    }
    roots
}

#[test]
fn fixed_points_match_polynomial_roots() {
    // z^2 (f_α(z) - z) = 1 + 2αz - z^3 for d = 2.
    let alpha = Complex64::new(0.05, 0.0);
    let set = periodic_points(&map(2, alpha), 1, &PeriodicConfig::default()).unwrap();
    assert_eq!(set.len(), 3);
    let neg_one = Complex64::new(-1.0, 0.0);
    let roots = monic_roots(&[neg_one, -2.0 * alpha, Complex64::new(0.0, 0.0)]);
    for z in &set.points {
        let nearest = roots.iter().map(|r| (r - z).norm()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-12, "{z} vs {roots:?}");
    }
}

#[test]
fn pressure_sum_is_bounded_across_periods() {
    let f = map(2, Complex64::new(0.1, 0.0));
    let cfg = PeriodicConfig::default();
    let n_max = default_n_max(2);
    let dim = bowen_dimension(&periodic_points(&f, n_max, &cfg).unwrap()).unwrap().dimension;
    let sets: Vec<_> = (n_max - 4..=n_max).map(|n| periodic_points(&f, n, &cfg).unwrap()).collect();
    let at = |d: f64| sets.iter().map(|s| pressure_sum(s, d)).collect::<Vec<f64>>();
    let band = at(dim);
    let (lo, hi) = band.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    assert!(hi / lo <= 2.0, "{band:?}");
    let above = at(dim + 0.05);
    let below = at(dim - 0.05);
    assert!(above.windows(2).all(|w| w[1] < w[0]), "{above:?}");
    assert!(below.windows(2).all(|w| w[1] > w[0]), "{below:?}");
}

#[test]
fn ifs_bounds_at_n_max() {
    let set = periodic_points(&map(2, Complex64::new(0.1, 0.0)), default_n_max(2), &PeriodicConfig::default()).unwrap();
    let est = bowen_dimension(&set).unwrap();
    let b = ifs_bounds(&set).unwrap();
    assert!(b.lower <= est.dimension && est.dimension <= b.upper);
}

#[test]
fn formula_error_has_one_cubic_constant() {
    let cfg = PeriodicConfig::default();
    let mut ratios = Vec::new();
    for d in [2u32, 3] {
        for lam in [1e3, 1e4, 1e5] {
            let p = FamilyParams::from_real(d, lam).unwrap();
            let set = periodic_points(&p.rescaled(), default_period(d), &cfg).unwrap();
            let diff = bowen_dimension(&set).unwrap().dimension - asymptotic_dimension(&p);
            ratios.push(diff.abs() / p.alpha().norm().powi(3));
        }
    }
    let c = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(c < 1.0, "{ratios:?}");
}

#[test]
fn circle_deviation_shrinks_with_lambda() {
    let mut cfg = PeriodicConfig::default();
    assert!(julia_circle_deviation(&map(2, Complex64::new(0.0, 0.0)), 500, &cfg).unwrap().deviation < 1e-15);
    cfg.alpha_ceiling = 0.35;
    cfg.alpha_step = 0.005;
    cfg.max_sweeps = 256;
    let dev = |lam: f64| {
        julia_circle_deviation(&FamilyParams::from_real(2, lam).unwrap().rescaled(), 500, &cfg).unwrap().deviation
    };
    assert!(dev(1000.0) < dev(30.0));
    let seq: Vec<f64> = (2..=6).map(|k| dev(10f64.powi(k))).collect();
    // Roughly |α| decay: each decade shrinks the deviation by about 10^{-1/3}.
    assert!(seq.windows(2).all(|w| w[1] < 0.6 * w[0]), "{seq:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn count_and_repulsion(d in 2u32..=3, n in 1u32..=7, r in 0.0f64..0.05, theta in 0.0f64..std::f64::consts::TAU) {
        let alpha = Complex64::from_polar(r, theta);
        let set = periodic_points(&map(d, alpha), n, &PeriodicConfig::default()).unwrap();
        let expected = ((-(d as i64)).pow(n) - 1).unsigned_abs() as usize;
        prop_assert_eq!(set.len(), expected);
        prop_assert!(set.residual < 1e-10);
        let floor = 0.5 * (d as f64).powi(n as i32);
        prop_assert!(set.multipliers.iter().all(|m| m.norm() >= floor));
    }

    #[test]
    fn dimension_is_bracketed(d in 2u32..=3, r in 0.0f64..0.2) {
        let set = periodic_points(&map(d, Complex64::new(r, 0.0)), 6, &PeriodicConfig::default()).unwrap();
        let est = bowen_dimension(&set).unwrap();
        prop_assert!(0.5 < est.dimension && est.dimension < 2.0);
        prop_assert!(est.residual < 1e-10);
        let (lo, hi) = *est.brackets.last().unwrap();
        prop_assert!(lo <= est.dimension && est.dimension <= hi);
    }
}

// Rounding leaves the pullback in a two-cycle with step just above 4ε here.
#[test]
fn pullback_stops_at_rounding_level() {
    let alpha = Complex64::from_polar(0.04947917800676496, 4.3274456786550894);
    let set = periodic_points(&map(3, alpha), 1, &PeriodicConfig::default()).unwrap();
    assert_eq!(set.len(), 4);
    assert!(set.residual < 1e-14);
}
