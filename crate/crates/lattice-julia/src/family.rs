//! The renormalization family `T_λ(z) = ((z+λ-1)/(z-1))^d`, its square
//! `U_λ = T_λ∘T_λ`, and the rescaled family `f_α`.

use crate::error::{Error, Result};
use crate::sphere::{safe_div, SpherePoint};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    d: u32,
    lambda: Complex64,
    alpha: Complex64,
    degenerate: bool,
}

impl FamilyParams {
    /// A regular member of the family. `λ = 0` is rejected; use
    /// [`FamilyParams::degenerate`] for that branch.
    pub fn new(d: u32, lambda: Complex64) -> Result<Self> {
        check_degree(d)?;
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be finite, got {lambda}")));
        }
        if lambda == C0 {
            return Err(Error::Degenerate);
        }
        let alpha = (-lambda.ln() / (d as f64 + 1.0)).exp();
        Ok(FamilyParams { d, lambda, alpha, degenerate: false })
    }

    /// The `λ = 0` member, where `U` collapses to `((z+d-1)/d)^d`.
    pub fn degenerate(d: u32) -> Result<Self> {
        check_degree(d)?;
        Ok(FamilyParams { d, lambda: C0, alpha: C0, degenerate: true })
    }

    pub fn from_real(d: u32, lambda: f64) -> Result<Self> {
        Self::new(d, Complex64::new(lambda, 0.0))
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// Principal `λ^{-1/(d+1)}`.
    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn q(&self) -> i64 {
        -(self.d as i64)
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn rescaled(&self) -> RescaledMap {
        RescaledMap { d: self.d, alpha: self.alpha }
    }

    /// `T_λ(z)`. Fails on the degenerate member, where `T` is undefined.
    pub fn eval_t(&self, z: SpherePoint) -> Result<SpherePoint> {
        if self.degenerate {
            return Err(Error::Degenerate);
        }
        Ok(self.t(z))
    }

    pub(crate) fn t(&self, z: SpherePoint) -> SpherePoint {
        let z = match z {
            SpherePoint::Infinity => return SpherePoint::ONE,
            SpherePoint::Finite(z) => z,
        };
        let e = z - 1.0;
        if e == C0 {
            return SpherePoint::Infinity;
        }
        let num = e + self.lambda;
        if num.norm() < e.norm() {
            SpherePoint::from_complex(safe_div(num, e).powu(self.d))
        } else {
            let w = safe_div(e, num).powu(self.d);
            if w == C0 {
                SpherePoint::Infinity
            } else {
                SpherePoint::Finite(w).recip()
            }
        }
    }

    /// All `d` preimages of `y` under `T_λ`, counted with multiplicity.
    pub(crate) fn t_preimages(&self, y: SpherePoint) -> Vec<SpherePoint> {
        let d = self.d as usize;
        let y = match y {
            SpherePoint::Infinity => return vec![SpherePoint::ONE; d],
            SpherePoint::Finite(y) => y,
        };
        if y == C1 {
            return (0..d).map(|k| self.xi(k)).collect();
        }
        let root = if y == C0 { C0 } else { y.powf(1.0 / self.d as f64) };
        (0..d)
            .map(|k| {
                let s = root * Complex64::from_polar(1.0, TAU * k as f64 / d as f64);
                let den = s - 1.0;
                if den == C0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::from_complex(safe_div(s + self.lambda - 1.0, den))
                }
            })
            .collect()
    }

    /// `U_λ(z) = T_λ(T_λ(z))`, or the polynomial branch when degenerate.
    pub fn eval_u(&self, z: SpherePoint) -> SpherePoint {
        if self.degenerate {
            return match z {
                SpherePoint::Infinity => SpherePoint::Infinity,
                SpherePoint::Finite(z) => {
                    let d = self.d as f64;
                    SpherePoint::from_complex(((z + d - 1.0) / d).powu(self.d))
                }
            };
        }
        self.t(self.t(z))
    }

    /// `U_λ'(z)`. Poles of `U` return [`SpherePoint::Infinity`].
    pub fn eval_u_prime(&self, z: SpherePoint) -> SpherePoint {
        let d = self.d;
        let df = d as f64;
        let z = match z {
            SpherePoint::Infinity => return SpherePoint::Infinity,
            SpherePoint::Finite(z) => z,
        };
        if self.degenerate {
            return SpherePoint::Finite(((z + df - 1.0) / df).powu(d - 1));
        }
        let lam = self.lambda;
        let a = z + lam - 1.0;
        let b = z - 1.0;
        let (ad, bd) = (a.powu(d), b.powu(d));
        let num = ad + (lam - 1.0) * bd;
        let den = ad - bd;
        if den == C0 {
            return SpherePoint::Infinity;
        }
        let top = lam * lam * df * df * a.powu(d - 1) * b.powu(d - 1) * num.powu(d - 1);
        SpherePoint::from_complex(safe_div(top, den.powu(d + 1)))
    }

    /// `ξ_k ∈ T^{-1}(1)`; `ξ_0 = ∞`.
    pub(crate) fn xi(&self, k: usize) -> SpherePoint {
        if k == 0 {
            return SpherePoint::Infinity;
        }
        let u = Complex64::from_polar(1.0, TAU * k as f64 / self.d as f64);
        SpherePoint::from_complex((u + self.lambda - 1.0) / (u - 1.0))
    }

    pub fn critical_data(&self) -> Result<CriticalData> {
        if self.degenerate {
            return Err(Error::Degenerate);
        }
        let d = self.d as usize;
        let xi = (0..d).map(|k| self.xi(k)).collect();
        let one_minus = 1.0 - self.lambda;
        let omega = if one_minus == C0 {
            vec![SpherePoint::ZERO; d]
        } else {
            let rho = one_minus.powf(1.0 / self.d as f64);
            (0..d)
                .map(|k| {
                    let s = rho * Complex64::from_polar(1.0, TAU * k as f64 / d as f64);
                    SpherePoint::from_complex(safe_div(s + self.lambda - 1.0, s - 1.0))
                })
                .collect()
        };
        Ok(CriticalData {
            xi,
            omega,
            fixed_critical: [SpherePoint::ONE, SpherePoint::Finite(one_minus), SpherePoint::Infinity],
        })
    }
}

fn check_degree(d: u32) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidParameter(format!("degree must be at least 2, got {d}")))
    } else {
        Ok(())
    }
}

/// Points tied to the critical orbit: `ξ_k` with `T(ξ_k) = 1`, `ω_k` with
/// `T(ω_k) = 1-λ`, and the three points `1, 1-λ, ∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    pub xi: Vec<SpherePoint>,
    pub omega: Vec<SpherePoint>,
    pub fixed_critical: [SpherePoint; 3],
}

/// `f_α(z) = Σ_{i<d} C(d,i) α^i z^{-(d-i)} = (1/z + α)^d - α^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledMap {
    pub d: u32,
    pub alpha: Complex64,
}

impl RescaledMap {
    pub fn new(d: u32, alpha: Complex64) -> Result<Self> {
        check_degree(d)?;
        Ok(RescaledMap { d, alpha })
    }

    pub fn q(&self) -> i64 {
        -(self.d as i64)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z == C0 {
            return Err(Error::Pole("f_alpha at z = 0".into()));
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let w = safe_div(C1, z);
        let mut acc = C0;
        let mut alpha_pow = C1;
        let mut binom = 1.0;
        for i in 0..self.d {
            acc += binom * alpha_pow * w.powu(self.d - i);
            binom = binom * (self.d - i) as f64 / (i + 1) as f64;
            alpha_pow *= self.alpha;
        }
        acc
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        if z == C0 {
            return Err(Error::Pole("f_alpha' at z = 0".into()));
        }
        Ok(self.derivative_unchecked(z))
    }

    pub(crate) fn derivative_unchecked(&self, z: Complex64) -> Complex64 {
        let w = safe_div(C1, z);
        -(self.d as f64) * (w + self.alpha).powu(self.d - 1) * w * w
    }

    /// All `d` solutions of `f_α(w) = y`.
    pub fn preimages(&self, y: Complex64) -> Vec<Complex64> {
        let r = (y + self.alpha.powu(self.d)).powf(1.0 / self.d as f64);
        (0..self.d)
            .map(|k| {
                let rho = r * Complex64::from_polar(1.0, TAU * k as f64 / self.d as f64);
                safe_div(C1, rho - self.alpha)
            })
            .collect()
    }

    /// The preimage of `y` closest to `near`.
    pub fn preimage_near(&self, y: Complex64, near: Complex64) -> Complex64 {
        let r = (y + self.alpha.powu(self.d)).powf(1.0 / self.d as f64);
        let mut best = C0;
        let mut best_dist = f64::INFINITY;
        for k in 0..self.d {
            let rho = r * Complex64::from_polar(1.0, TAU * k as f64 / self.d as f64);
            let w = safe_div(C1, rho - self.alpha);
            let dist = (w - near).norm();
            if dist < best_dist {
                best_dist = dist;
                best = w;
            }
        }
        best
    }

    /// Affine conjugacy `φ(z) = α^d (z-1)` carrying `T_λ` to `f_α`.
    pub fn to_rescaled(&self, z: Complex64) -> Complex64 {
        self.alpha.powu(self.d) * (z - 1.0)
    }

    pub fn from_rescaled(&self, w: Complex64) -> Complex64 {
        w / self.alpha.powu(self.d) + 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn t_swaps_one_and_infinity() {
        let p = FamilyParams::from_real(2, 4.0).unwrap();
        assert_eq!(p.eval_t(SpherePoint::ONE).unwrap(), SpherePoint::Infinity);
        assert_eq!(p.eval_t(SpherePoint::Infinity).unwrap(), SpherePoint::ONE);
    }

    #[test]
    fn t_near_one_does_not_overflow() {
        let p = FamilyParams::from_real(2, 4.0).unwrap();
        let v = p.eval_t(SpherePoint::Finite(c(1.0, 1e-300))).unwrap();
        assert!(v.modulus() > 1e100);
        let v = p.eval_t(SpherePoint::Finite(c(1.0 + 1e-12, 0.0))).unwrap();
        assert!(v.modulus() > 1e20 && v.modulus().is_finite());
    }

    #[test]
    fn t_matches_direct_formula() {
        let p = FamilyParams::new(3, c(1.3, -0.4)).unwrap();
        let z = c(0.2, 0.7);
        let direct = ((z + p.lambda() - 1.0) / (z - 1.0)).powu(3);
        let got = p.eval_t(SpherePoint::Finite(z)).unwrap().finite().unwrap();
        assert!((got - direct).norm() < 1e-13 * direct.norm());
    }

    #[test]
    fn lambda_zero_is_rejected_unless_degenerate() {
        assert_eq!(FamilyParams::new(2, C0), Err(Error::Degenerate));
        let p = FamilyParams::degenerate(2).unwrap();
        assert!(p.eval_t(SpherePoint::ZERO).is_err());
        let u = p.eval_u(SpherePoint::Finite(c(3.0, 0.0))).finite().unwrap();
        assert!((u - c(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn alpha_satisfies_defining_relation() {
        for lam in [c(4.0, 0.0), c(-2.0, 3.0), c(1e6, 1.0), c(0.01, -0.02)] {
            let p = FamilyParams::new(3, lam).unwrap();
            let r = p.alpha().powu(4) * lam;
            assert!((r - 1.0).norm() < 8.0 * f64::EPSILON, "{lam}: {r}");
        }
    }

    #[test]
    fn u_prime_matches_central_difference() {
        let p = FamilyParams::from_real(2, 4.0).unwrap();
        let h = 1e-6;
        let u = |x: f64| p.eval_u(SpherePoint::new(x, 0.0)).finite().unwrap();
        let fd = (u(h) - u(-h)) / (2.0 * h);
        let exact = p.eval_u_prime(SpherePoint::ZERO).finite().unwrap();
        assert!((fd - exact).norm() < 1e-6 * exact.norm().max(1.0));
    }

    #[test]
    fn u_prime_matches_chain_rule() {
        let p = FamilyParams::new(3, c(2.0, 1.0)).unwrap();
        let lam = p.lambda();
        let tp = |z: Complex64| {
            3.0 * ((z + lam - 1.0) / (z - 1.0)).powu(2) * (-lam) / ((z - 1.0) * (z - 1.0))
        };
        let z = c(0.4, -0.3);
        let tz = p.t(SpherePoint::Finite(z)).finite().unwrap();
        let chain = tp(tz) * tp(z);
        let got = p.eval_u_prime(SpherePoint::Finite(z)).finite().unwrap();
        assert!((got - chain).norm() < 1e-10 * chain.norm());
    }

    #[test]
    fn u_prime_pole_is_reported_as_infinite() {
        // T(z) = 1 at ξ_1, so U has a pole there.
        let p = FamilyParams::from_real(2, 4.0).unwrap();
        let xi1 = p.critical_data().unwrap().xi[1];
        assert!(p.eval_u_prime(xi1).modulus() > 1e12);
    }

    #[test]
    fn critical_points_map_where_expected() {
        for (d, lam) in [(2, c(4.0, 0.0)), (3, c(1.3, 1.6)), (4, c(-2.5, 0.5))] {
            let p = FamilyParams::new(d, lam).unwrap();
            let cd = p.critical_data().unwrap();
            assert_eq!(cd.xi[0], SpherePoint::Infinity);
            for x in &cd.xi[1..] {
                let v = p.t(*x).finite().unwrap();
                assert!((v - 1.0).norm() < 1e-10);
            }
            for w in &cd.omega {
                let v = p.t(*w).finite().unwrap();
                assert!((v - (1.0 - lam)).norm() < 1e-10 * (1.0 + lam.norm()));
            }
        }
    }

    #[test]
    fn lambda_one_collapses_omega_to_zero() {
        let p = FamilyParams::from_real(3, 1.0).unwrap();
        let cd = p.critical_data().unwrap();
        assert!(cd.omega.iter().all(|w| *w == SpherePoint::ZERO));
    }

    #[test]
    fn t_preimages_are_preimages() {
        let p = FamilyParams::new(3, c(1.5, 0.8)).unwrap();
        let y = SpherePoint::new(-0.7, 2.0);
        for x in p.t_preimages(y) {
            assert!(p.t(x).chordal(&y) < 1e-12);
        }
    }

    #[test]
    fn rescaled_map_is_conjugate_to_t() {
        for (d, lam) in [(2, c(1000.0, 0.0)), (3, c(50.0, 20.0))] {
            let p = FamilyParams::new(d, lam).unwrap();
            let f = p.rescaled();
            for z in [c(0.3, 0.1), c(-0.5, 1.2), c(2.0, -1.0)] {
                let lhs = f.eval(f.to_rescaled(z)).unwrap();
                let rhs = f.to_rescaled(p.t(SpherePoint::Finite(z)).finite().unwrap());
                assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(1.0), "{d} {z}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn rescaled_map_matches_binomial_closed_form() {
        let f = RescaledMap::new(4, c(0.05, 0.02)).unwrap();
        let z = c(0.9, 0.3);
        let closed = (1.0 / z + f.alpha).powu(4) - f.alpha.powu(4);
        assert!((f.eval(z).unwrap() - closed).norm() < 1e-13);
        assert!(f.eval(C0).is_err());
    }

    #[test]
    fn rescaled_derivative_matches_central_difference() {
        let f = RescaledMap::new(3, c(0.1, -0.05)).unwrap();
        let z = c(0.8, 0.6);
        let h = 1e-6;
        let fd = (f.eval(z + h).unwrap() - f.eval(z - h).unwrap()) / (2.0 * h);
        assert!((fd - f.derivative(z).unwrap()).norm() < 1e-7);
    }

    #[test]
    fn derivative_expansion_is_exact_for_cubic_and_third_order_for_quartic() {
        let trunc = |q: f64, z: Complex64, a: Complex64| {
            q * z.powf(q - 1.0) - q * (q + 1.0) * z.powf(q) * a
                + q * (q + 1.0) * (q + 2.0) / 2.0 * z.powf(q + 1.0) * a * a
        };
        let z = Complex64::from_polar(1.0, 0.7);
        let f3 = RescaledMap::new(3, c(0.05, 0.0)).unwrap();
        assert!((f3.derivative(z).unwrap() - trunc(-3.0, z, f3.alpha)).norm() < 1e-13);

        let mut ratios = Vec::new();
        for a in [0.02, 0.01, 0.005] {
            let f4 = RescaledMap::new(4, c(a, 0.0)).unwrap();
            let diff = (f4.derivative(z).unwrap() - trunc(-4.0, z, f4.alpha)).norm();
            ratios.push(diff / (a * a * a));
        }
        let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.1, "{ratios:?}");
    }
}
