use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtPoint {
    Finite(Complex64),
    Infinity,
}

/// Finite points serialize as `[re, im]`, the point at infinity as `"infinity"`.
impl Serialize for ExtPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtPoint::Finite(z) => z.serialize(s),
            ExtPoint::Infinity => s.serialize_str("infinity"),
        }
    }
}

impl ExtPoint {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            ExtPoint::Finite(z) => Some(z),
            ExtPoint::Infinity => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedPoints {
    /// A single fixed point of multiplicity two (parabolic maps).
    Double(ExtPoint),
    Pair(ExtPoint, ExtPoint),
}

impl FixedPoints {
    pub fn points(&self) -> Vec<ExtPoint> {
        match *self {
            FixedPoints::Double(p) => vec![p],
            FixedPoints::Pair(p, q) => vec![p, q],
        }
    }
}

/// `z -> (a z + b) / (c z + d)`, stored with `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMobius")]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMobius {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl TryFrom<RawMobius> for Mobius {
    type Error = Error;

    fn try_from(raw: RawMobius) -> Result<Self> {
        Mobius::new(raw.a, raw.b, raw.c, raw.d)
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        let det = m.det();
        if det.norm() == 0.0 || !det.norm().is_finite() {
            return Err(Error::Usage(format!(
                "degenerate Mobius coefficients ({a}, {b}, {c}, {d})"
            )));
        }
        Ok(m.normalized())
    }

    pub fn identity() -> Self {
        Mobius {
            a: ONE,
            b: ZERO,
            c: ZERO,
            d: ONE,
        }
    }

    /// `z -> z + t`.
    pub fn translation(t: Complex64) -> Self {
        Mobius {
            a: ONE,
            b: t,
            c: ZERO,
            d: ONE,
        }
        .normalized()
    }

    /// `z -> scale * z + shift`.
    pub fn affine(scale: Complex64, shift: Complex64) -> Result<Self> {
        Mobius::new(scale, shift, ZERO, ONE)
    }

    /// `z -> e^{i angle} z`.
    pub fn rotation(angle: f64) -> Self {
        let half = Complex64::from_polar(1.0, 0.5 * angle);
        Mobius {
            a: half,
            b: ZERO,
            c: ZERO,
            d: half.conj(),
        }
        .normalized()
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    fn normalized(self) -> Self {
        let det = self.det();
        let m = if (det - ONE).norm() > 4.0 * f64::EPSILON {
            let k = ONE / det.sqrt();
            Mobius {
                a: self.a * k,
                b: self.b * k,
                c: self.c * k,
                d: self.d * k,
            }
        } else {
            self
        };
        // Fix the projective sign: first nonzero entry points into the right half-plane.
        let lead = [m.a, m.b, m.c, m.d]
            .into_iter()
            .find(|z| *z != ZERO)
            .unwrap_or(ONE);
        if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) {
            Mobius {
                a: -m.a,
                b: -m.b,
                c: -m.c,
                d: -m.d,
            }
        } else {
            m
        }
    }

    pub fn is_identity(&self) -> bool {
        self.b == ZERO && self.c == ZERO && self.a == self.d && (self.a == ONE || self.a == -ONE)
    }

    fn is_real(&self) -> bool {
        self.a.im == 0.0 && self.b.im == 0.0 && self.c.im == 0.0 && self.d.im == 0.0
    }

    /// Value on the extended plane.
    pub fn apply_ext(&self, z: ExtPoint) -> ExtPoint {
        match z {
            ExtPoint::Infinity => {
                if self.c == ZERO {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(self.a / self.c)
                }
            }
            ExtPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den == ZERO {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(self.eval_unchecked(z, den))
                }
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        if den == ZERO {
            return Err(Error::Pole { location: z });
        }
        let w = self.eval_unchecked(z, den);
        if w.re.is_finite() && w.im.is_finite() {
            Ok(w)
        } else {
            Err(Error::Pole { location: z })
        }
    }

    fn eval_unchecked(&self, z: Complex64, den: Complex64) -> Complex64 {
        if self.is_real() {
            // Real matrices preserve the half-plane: Im f(z) = det Im z / |cz + d|^2,
            // computed directly so that points near the real axis keep their
            // relative accuracy.
            let (a, b, c, d) = (self.a.re, self.b.re, self.c.re, self.d.re);
            let q = den.norm_sqr();
            let re = (a * c * z.norm_sqr() + (a * d + b * c) * z.re + b * d) / q;
            let im = (a * d - b * c) * z.im / q;
            Complex64::new(re, im)
        } else {
            (self.a * z + self.b) / den
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        if den == ZERO {
            return Err(Error::Pole { location: z });
        }
        Ok(self.det() / (den * den))
    }

    pub fn inverse(&self) -> Self {
        Mobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
        .normalized()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Self {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
        .normalized()
    }

    /// Integer power by repeated squaring; negative powers invert.
    pub fn power(&self, n: i64) -> Self {
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut k = n.unsigned_abs();
        let mut acc = Mobius::identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }

    /// Roots of `c z^2 + (d - a) z - b = 0` on the extended plane.
    pub fn fixed_points(&self) -> Result<FixedPoints> {
        if self.is_identity() {
            return Err(Error::Usage("the identity fixes every point".into()));
        }
        let scale = self.a.norm() + self.b.norm() + self.c.norm() + self.d.norm();
        if self.c.norm() <= 1e-15 * scale {
            let slope = self.d - self.a;
            if slope.norm() <= 1e-15 * scale {
                return Ok(FixedPoints::Double(ExtPoint::Infinity));
            }
            return Ok(FixedPoints::Pair(
                ExtPoint::Finite(self.b / slope),
                ExtPoint::Infinity,
            ));
        }
        let tr = self.trace();
        let disc = tr * tr - Complex64::new(4.0, 0.0);
        if disc.norm() < 1e-12 {
            return Ok(FixedPoints::Double(ExtPoint::Finite(
                (self.a - self.d) / (self.c * 2.0),
            )));
        }
        // Avoid cancellation: q = -(B + s sqrt(disc)) / 2 with B = d - a.
        let big_b = self.d - self.a;
        let root = disc.sqrt();
        let s = if (big_b.conj() * root).re >= 0.0 { 1.0 } else { -1.0 };
        let q = -(big_b + root * s) * 0.5;
        let z1 = q / self.c;
        let z2 = -self.b / q;
        Ok(FixedPoints::Pair(ExtPoint::Finite(z1), ExtPoint::Finite(z2)))
    }
}

impl Mul for Mobius {
    type Output = Mobius;

    fn mul(self, rhs: Mobius) -> Mobius {
        self.compose(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalization_is_idempotent() {
        let m = Mobius::new(c(2.0, 1.0), c(0.3, 0.0), c(-0.5, 0.2), c(1.0, -1.0)).unwrap();
        assert!((m.det() - ONE).norm() < 1e-14);
        let again = Mobius::new(m.a, m.b, m.c, m.d).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn degenerate_matrix_is_rejected() {
        assert!(Mobius::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)).is_err());
    }

    #[test]
    fn pole_is_an_error() {
        let m = Mobius::new(ONE, ZERO, ONE, -ONE).unwrap();
        assert!(matches!(m.eval(ONE), Err(Error::Pole { .. })));
        assert_eq!(m.apply_ext(ExtPoint::Finite(ONE)), ExtPoint::Infinity);
    }

    #[test]
    fn translation_fixes_only_infinity() {
        let m = Mobius::translation(c(-1.0, 0.0));
        assert_eq!(m.fixed_points().unwrap(), FixedPoints::Double(ExtPoint::Infinity));
        assert!(Mobius::identity().fixed_points().is_err());
    }

    #[test]
    fn affine_contraction_fixed_point() {
        let (delta, theta) = (0.3, 0.7);
        let shift = Complex64::from_polar(delta, theta);
        let m = Mobius::affine(c(0.5, 0.0), shift).unwrap();
        match m.fixed_points().unwrap() {
            FixedPoints::Pair(ExtPoint::Finite(z), ExtPoint::Infinity) => {
                assert!((z - shift * 2.0).norm() < 1e-14)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn power_matches_repeated_composition() {
        let m = Mobius::new(c(1.0, 0.2), c(0.1, 0.0), c(0.05, 0.1), c(0.9, 0.0)).unwrap();
        let mut acc = Mobius::identity();
        for _ in 0..13 {
            acc = acc * m;
        }
        let p = m.power(13);
        let z = c(0.1, 0.3);
        assert!((p.eval(z).unwrap() - acc.eval(z).unwrap()).norm() < 1e-12);
        let back = m.power(-13).compose(&p);
        assert!((back.eval(z).unwrap() - z).norm() < 1e-12);
    }

    #[test]
    fn real_path_agrees_with_complex_division() {
        let m = Mobius::new(c(3.0, 0.0), c(-4.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let z = c(0.7, 0.4);
        let direct = (m.a * z + m.b) / (m.c * z + m.d);
        assert!((m.eval(z).unwrap() - direct).norm() < 1e-14);
    }
}
