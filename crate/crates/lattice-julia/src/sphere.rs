//! Points of the Riemann sphere and the chordal metric.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub const ONE: SpherePoint = SpherePoint::Finite(Complex64 { re: 1.0, im: 0.0 });
    pub const ZERO: SpherePoint = SpherePoint::Finite(Complex64 { re: 0.0, im: 0.0 });

    pub fn new(re: f64, im: f64) -> Self {
        Self::from_complex(Complex64::new(re, im))
    }

    /// Non-finite components collapse to the point at infinity.
    pub fn from_complex(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    pub fn modulus(&self) -> f64 {
        match self {
            SpherePoint::Finite(z) => z.norm(),
            SpherePoint::Infinity => f64::INFINITY,
        }
    }

    /// Reciprocal `1/z`, with `1/0 = ∞` and `1/∞ = 0`.
    pub fn recip(&self) -> SpherePoint {
        match *self {
            SpherePoint::Infinity => SpherePoint::ZERO,
            SpherePoint::Finite(z) if z == Complex64::new(0.0, 0.0) => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::from_complex(safe_div(Complex64::new(1.0, 0.0), z)),
        }
    }

    /// Chordal distance; lies in `[0, 2]`.
    pub fn chordal(&self, other: &SpherePoint) -> f64 {
        use SpherePoint::*;
        match (*self, *other) {
            (Infinity, Infinity) => 0.0,
            (Finite(a), Infinity) | (Infinity, Finite(a)) => {
                let r = a.norm();
                if r <= 1.0 {
                    2.0 / (1.0 + r * r).sqrt()
                } else {
                    2.0 / r / (1.0 + 1.0 / (r * r)).sqrt()
                }
            }
            (Finite(a), Finite(b)) => {
                let (ra, rb) = (a.norm(), b.norm());
                if ra <= 1.0 && rb <= 1.0 {
                    2.0 * (a - b).norm() / ((1.0 + ra * ra) * (1.0 + rb * rb)).sqrt()
                } else if ra > 1.0 && rb > 1.0 {
                    let (ia, ib) = (safe_div(1.0.into(), a), safe_div(1.0.into(), b));
                    let (sa, sb) = (1.0 / ra, 1.0 / rb);
                    2.0 * (ia - ib).norm() / ((1.0 + sa * sa) * (1.0 + sb * sb)).sqrt()
                } else {
                    let (small, big, rs, rbg) = if ra <= 1.0 { (a, b, ra, rb) } else { (b, a, rb, ra) };
                    let t = safe_div(small, big) - 1.0;
                    2.0 * t.norm() / ((1.0 + rs * rs) * (1.0 + 1.0 / (rbg * rbg))).sqrt()
                }
            }
        }
    }

    /// Midpoint of the segment between two points, taken in whichever chart
    /// keeps both endpoints bounded.
    pub fn midpoint(&self, other: &SpherePoint) -> SpherePoint {
        use SpherePoint::*;
        match (*self, *other) {
            (Finite(a), Finite(b)) if a.norm() <= 1.0 || b.norm() <= 1.0 => Finite((a + b) * 0.5),
            _ => {
                let (ia, ib) = (self.recip(), other.recip());
                match (ia, ib) {
                    (Finite(x), Finite(y)) => Finite((x + y) * 0.5).recip(),
                    _ => Infinity,
                }
            }
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::from_complex(z)
    }
}

/// Complex division scaled so that tiny or huge operands never underflow
/// the denominator's squared norm.
pub fn safe_div(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.re.abs().max(b.im.abs());
    if s == 0.0 {
        return Complex64::new(f64::INFINITY, f64::INFINITY);
    }
    let bs = b / s;
    let a_s = a / s;
    let den = bs.norm_sqr();
    Complex64::new(
        (a_s.re * bs.re + a_s.im * bs.im) / den,
        (a_s.im * bs.re - a_s.re * bs.im) / den,
    )
}
