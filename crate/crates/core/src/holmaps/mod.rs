//! Closed-form holomorphic maps and their algebra.

mod classify;
mod mobius;

pub use classify::{classify, is_self_map, sup_deviation, MapClass, Region};
pub use mobius::{ExtPoint, FixedPoints, Mobius};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `phi_{theta, 1}(z) = e^{i theta} z` or `phi_{theta, -1}(z) = e^{i theta} r / z`
/// on the annulus `A(r, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAnnulusAut")]
pub struct AnnulusAut {
    pub theta: f64,
    pub sign: i8,
    pub inner_radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnulusAut {
    theta: f64,
    sign: i8,
    inner_radius: f64,
}

impl TryFrom<RawAnnulusAut> for AnnulusAut {
    type Error = Error;

    fn try_from(raw: RawAnnulusAut) -> Result<Self> {
        AnnulusAut::new(raw.theta, raw.sign, raw.inner_radius)
    }
}

impl AnnulusAut {
    pub fn new(theta: f64, sign: i8, inner_radius: f64) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::Usage(format!("annulus automorphism sign must be +-1, got {sign}")));
        }
        if !(inner_radius > 0.0 && inner_radius < 1.0) {
            return Err(Error::Usage(format!(
                "annulus inner radius must lie in (0, 1), got {inner_radius}"
            )));
        }
        Ok(AnnulusAut {
            theta,
            sign,
            inner_radius,
        })
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let rot = Complex64::from_polar(1.0, self.theta);
        if self.sign == 1 {
            Ok(rot * z)
        } else if z == Complex64::new(0.0, 0.0) {
            Err(Error::Pole { location: z })
        } else {
            Ok(rot * self.inner_radius / z)
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let rot = Complex64::from_polar(1.0, self.theta);
        if self.sign == 1 {
            Ok(rot)
        } else if z == Complex64::new(0.0, 0.0) {
            Err(Error::Pole { location: z })
        } else {
            Ok(-rot * self.inner_radius / (z * z))
        }
    }

    /// `self ∘ other`, or `None` when the annuli differ.
    pub fn compose(&self, other: &AnnulusAut) -> Option<AnnulusAut> {
        if self.inner_radius != other.inner_radius {
            return None;
        }
        let theta = match self.sign {
            1 => self.theta + other.theta,
            _ => self.theta - other.theta,
        };
        Some(AnnulusAut {
            theta,
            sign: self.sign * other.sign,
            inner_radius: self.inner_radius,
        })
    }

    pub fn inverse(&self) -> AnnulusAut {
        match self.sign {
            1 => AnnulusAut {
                theta: -self.theta,
                ..*self
            },
            _ => *self,
        }
    }

    pub fn power(&self, n: i64) -> AnnulusAut {
        match self.sign {
            1 => AnnulusAut {
                theta: self.theta * n as f64,
                ..*self
            },
            _ if n % 2 == 0 => AnnulusAut {
                theta: 0.0,
                sign: 1,
                ..*self
            },
            _ => *self,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.sign == 1 && self.theta == 0.0
    }
}

/// A closed-form holomorphic map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", try_from = "RawHolMap")]
pub enum HolMap {
    Mobius(Mobius),
    /// `prefactor * prod_k (z - a_k) / (1 - conj(a_k) z)`.
    BlaschkeLike {
        prefactor: Complex64,
        factors: Vec<Complex64>,
    },
    /// `w -> c + exp(2 pi i w)` on the half-plane.
    ExpAffine { c: Complex64 },
    AnnulusAut(AnnulusAut),
    /// `outer ∘ inner ∘ outer^{-1}`.
    Conjugate {
        outer: Box<HolMap>,
        inner: Box<HolMap>,
    },
    /// `maps[0] ∘ maps[1] ∘ ... ∘ maps[n-1]`; the last map is applied first.
    Composite { maps: Vec<HolMap> },
}

#[derive(Deserialize)]
#[serde(tag = "variant", deny_unknown_fields)]
enum RawHolMap {
    Mobius {
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    },
    BlaschkeLike {
        prefactor: Complex64,
        factors: Vec<Complex64>,
    },
    ExpAffine {
        c: Complex64,
    },
    AnnulusAut {
        theta: f64,
        sign: i8,
        inner_radius: f64,
    },
    Conjugate {
        outer: Box<HolMap>,
        inner: Box<HolMap>,
    },
    Composite {
        maps: Vec<HolMap>,
    },
}

impl TryFrom<RawHolMap> for HolMap {
    type Error = Error;

    fn try_from(raw: RawHolMap) -> Result<Self> {
        Ok(match raw {
            RawHolMap::Mobius { a, b, c, d } => HolMap::Mobius(Mobius::new(a, b, c, d)?),
            RawHolMap::BlaschkeLike { prefactor, factors } => HolMap::blaschke(prefactor, factors)?,
            RawHolMap::ExpAffine { c } => HolMap::ExpAffine { c },
            RawHolMap::AnnulusAut {
                theta,
                sign,
                inner_radius,
            } => HolMap::AnnulusAut(AnnulusAut::new(theta, sign, inner_radius)?),
            RawHolMap::Conjugate { outer, inner } => HolMap::conjugate(*outer, *inner)?,
            RawHolMap::Composite { maps } => HolMap::Composite { maps },
        })
    }
}

impl From<Mobius> for HolMap {
    fn from(m: Mobius) -> Self {
        HolMap::Mobius(m)
    }
}

impl From<AnnulusAut> for HolMap {
    fn from(a: AnnulusAut) -> Self {
        HolMap::AnnulusAut(a)
    }
}

impl HolMap {
    pub fn identity() -> Self {
        HolMap::Mobius(Mobius::identity())
    }

    pub fn mobius(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        Ok(HolMap::Mobius(Mobius::new(a, b, c, d)?))
    }

    /// `z -> scale * z + shift`.
    pub fn affine(scale: Complex64, shift: Complex64) -> Result<Self> {
        Ok(HolMap::Mobius(Mobius::affine(scale, shift)?))
    }

    pub fn translation(t: Complex64) -> Self {
        HolMap::Mobius(Mobius::translation(t))
    }

    pub fn rotation(angle: f64) -> Self {
        HolMap::Mobius(Mobius::rotation(angle))
    }

    pub fn blaschke(prefactor: Complex64, factors: Vec<Complex64>) -> Result<Self> {
        if prefactor.norm() > 1.0 {
            return Err(Error::Usage(format!("Blaschke prefactor {prefactor} exceeds modulus 1")));
        }
        if let Some(a) = factors.iter().find(|a| a.norm() >= 1.0) {
            return Err(Error::Usage(format!("Blaschke zero {a} is not inside the disk")));
        }
        Ok(HolMap::BlaschkeLike { prefactor, factors })
    }

    pub fn exp_affine(c: Complex64) -> Self {
        HolMap::ExpAffine { c }
    }

    pub fn annulus_aut(theta: f64, sign: i8, inner_radius: f64) -> Result<Self> {
        Ok(HolMap::AnnulusAut(AnnulusAut::new(theta, sign, inner_radius)?))
    }

    /// `outer ∘ inner ∘ outer^{-1}`; `outer` must be invertible.
    pub fn conjugate(outer: HolMap, inner: HolMap) -> Result<Self> {
        outer.inverse()?;
        Ok(HolMap::Conjugate {
            outer: Box::new(outer),
            inner: Box::new(inner),
        })
    }

    pub fn is_identity(&self) -> bool {
        match self {
            HolMap::Mobius(m) => m.is_identity(),
            HolMap::AnnulusAut(a) => a.is_identity(),
            HolMap::BlaschkeLike { prefactor, factors } => {
                *prefactor == ONE && factors.len() == 1 && factors[0] == Complex64::new(0.0, 0.0)
            }
            HolMap::Conjugate { inner, .. } => inner.is_identity(),
            HolMap::Composite { maps } => maps.iter().all(HolMap::is_identity),
            HolMap::ExpAffine { .. } => false,
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            HolMap::Mobius(m) => m.eval(z),
            HolMap::BlaschkeLike { prefactor, factors } => {
                let mut acc = *prefactor;
                for a in factors {
                    let den = ONE - a.conj() * z;
                    if den == Complex64::new(0.0, 0.0) {
                        return Err(Error::Pole { location: z });
                    }
                    acc *= (z - a) / den;
                }
                Ok(acc)
            }
            HolMap::ExpAffine { c } => Ok(c + unit_exp(z)),
            HolMap::AnnulusAut(a) => a.eval(z),
            HolMap::Conjugate { outer, inner } => {
                if let Some(m) = self.as_mobius() {
                    return m.eval(z);
                }
                let u = outer.inverse()?.eval(z)?;
                outer.eval(inner.eval(u)?)
            }
            HolMap::Composite { maps } => maps.iter().rev().try_fold(z, |w, f| f.eval(w)),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        match self {
            HolMap::Mobius(m) => m.derivative(z),
            HolMap::BlaschkeLike { prefactor, factors } => {
                let mut values = Vec::with_capacity(factors.len());
                let mut slopes = Vec::with_capacity(factors.len());
                for a in factors {
                    let den = ONE - a.conj() * z;
                    if den == Complex64::new(0.0, 0.0) {
                        return Err(Error::Pole { location: z });
                    }
                    values.push((z - a) / den);
                    slopes.push((1.0 - a.norm_sqr()) / (den * den));
                }
                let mut total = Complex64::new(0.0, 0.0);
                for (k, slope) in slopes.iter().enumerate() {
                    let others: Complex64 = values
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, v)| *v)
                        .product();
                    total += slope * others;
                }
                Ok(prefactor * total)
            }
            HolMap::ExpAffine { .. } => {
                Ok(Complex64::new(0.0, 2.0 * PI) * unit_exp(z))
            }
            HolMap::AnnulusAut(a) => a.derivative(z),
            HolMap::Conjugate { outer, inner } => {
                if let Some(m) = self.as_mobius() {
                    return m.derivative(z);
                }
                let back = outer.inverse()?;
                let u = back.eval(z)?;
                let v = inner.eval(u)?;
                Ok(outer.derivative(v)? * inner.derivative(u)? * back.derivative(z)?)
            }
            HolMap::Composite { maps } => {
                let mut w = z;
                let mut slope = ONE;
                for f in maps.iter().rev() {
                    slope *= f.derivative(w)?;
                    w = f.eval(w)?;
                }
                Ok(slope)
            }
        }
    }

    /// `self ∘ inner`. Mobius and annulus factors are reduced in closed form;
    /// anything else becomes a flat [`HolMap::Composite`].
    pub fn compose(&self, inner: &HolMap) -> HolMap {
        if inner.is_identity() {
            return self.clone();
        }
        if self.is_identity() {
            return inner.clone();
        }
        let mut list: Vec<HolMap> = Vec::new();
        for f in self.factors().into_iter().chain(inner.factors()) {
            push_reduced(&mut list, f);
        }
        match list.len() {
            0 => HolMap::identity(),
            1 => list.pop().expect("one element"),
            _ => HolMap::Composite { maps: list },
        }
    }

    fn factors(&self) -> Vec<HolMap> {
        match self {
            HolMap::Composite { maps } => maps.clone(),
            other => vec![other.clone()],
        }
    }

    pub fn inverse(&self) -> Result<HolMap> {
        match self {
            HolMap::Mobius(m) => Ok(HolMap::Mobius(m.inverse())),
            HolMap::AnnulusAut(a) => Ok(HolMap::AnnulusAut(a.inverse())),
            HolMap::Conjugate { outer, inner } => Ok(HolMap::Conjugate {
                outer: outer.clone(),
                inner: Box::new(inner.inverse()?),
            }),
            HolMap::Composite { maps } => {
                let inv = maps.iter().rev().map(HolMap::inverse).collect::<Result<Vec<_>>>()?;
                Ok(HolMap::Composite { maps: inv })
            }
            HolMap::BlaschkeLike { .. } => match self.as_mobius() {
                Some(m) => Ok(HolMap::Mobius(m.inverse())),
                None => Err(Error::Usage(
                    "only single-factor unimodular Blaschke products are invertible".into(),
                )),
            },
            HolMap::ExpAffine { .. } => {
                Err(Error::Usage("exponential-affine maps are not invertible".into()))
            }
        }
    }

    /// `n`-fold composition; negative `n` composes the inverse.
    pub fn power(&self, n: i64) -> Result<HolMap> {
        match self {
            HolMap::Mobius(m) => Ok(HolMap::Mobius(m.power(n))),
            HolMap::AnnulusAut(a) => Ok(HolMap::AnnulusAut(a.power(n))),
            _ => {
                let base = if n < 0 { self.inverse()? } else { self.clone() };
                Ok((0..n.unsigned_abs()).fold(HolMap::identity(), |acc, _| acc.compose(&base)))
            }
        }
    }

    /// The Mobius matrix of this map, when it is one.
    pub fn as_mobius(&self) -> Option<Mobius> {
        match self {
            HolMap::Mobius(m) => Some(*m),
            HolMap::BlaschkeLike { prefactor, factors }
                if factors.len() == 1 && (prefactor.norm() - 1.0).abs() < 1e-15 =>
            {
                let a = factors[0];
                Mobius::new(*prefactor, -prefactor * a, -a.conj(), ONE).ok()
            }
            HolMap::Conjugate { outer, inner } => {
                let o = outer.as_mobius()?;
                Some(o.compose(&inner.as_mobius()?).compose(&o.inverse()))
            }
            HolMap::Composite { maps } => maps
                .iter()
                .try_fold(Mobius::identity(), |acc, f| Some(acc.compose(&f.as_mobius()?))),
            _ => None,
        }
    }
}

/// `exp(2 pi i z)`, with the real part reduced mod 1 so integer shifts are exact.
fn unit_exp(z: Complex64) -> Complex64 {
    Complex64::from_polar((-2.0 * PI * z.im).exp(), 2.0 * PI * z.re.rem_euclid(1.0))
}

fn push_reduced(list: &mut Vec<HolMap>, next: HolMap) {
    if next.is_identity() {
        return;
    }
    let merged = match (list.last(), &next) {
        (Some(HolMap::Mobius(m1)), HolMap::Mobius(m2)) => Some(HolMap::Mobius(m1.compose(m2))),
        (Some(HolMap::AnnulusAut(a1)), HolMap::AnnulusAut(a2)) => {
            a1.compose(a2).map(HolMap::AnnulusAut)
        }
        _ => None,
    };
    match merged {
        Some(m) => {
            list.pop();
            if !m.is_identity() {
                list.push(m);
            }
        }
        None => list.push(next),
    }
}
