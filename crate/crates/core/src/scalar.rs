//! Exact scalars: rationals in characteristic 0, residues modulo a prime.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Field characteristic: 0 or a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Characteristic(u64);

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("characteristic {0} is neither 0 nor a prime")]
    NotPrime(u64),
    #[error("cannot parse scalar {0:?}")]
    Parse(String),
    #[error("denominator divisible by the characteristic in {0:?}")]
    NonInvertible(String),
}

impl Characteristic {
    pub const ZERO: Characteristic = Characteristic(0);

    pub fn new(p: u64) -> Result<Characteristic, ScalarError> {
        if p == 0 || is_prime(p) {
            Ok(Characteristic(p))
        } else {
            Err(ScalarError::NotPrime(p))
        }
    }

    /// Shorthand for tests and fixed literals; panics on a composite.
    pub fn of(p: u64) -> Characteristic {
        Characteristic::new(p).expect("characteristic must be 0 or prime")
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn zero(self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(self, v: i64) -> Scalar {
        if self.0 == 0 {
            Scalar::Rational(BigRational::from_integer(BigInt::from(v)))
        } else {
            Scalar::Residue { value: (v.rem_euclid(self.0 as i64)) as u64, modulus: self.0 }
        }
    }

    pub fn from_bigint(self, v: &BigInt) -> Scalar {
        if self.0 == 0 {
            Scalar::Rational(BigRational::from_integer(v.clone()))
        } else {
            let m = BigInt::from(self.0);
            Scalar::Residue { value: v.mod_floor(&m).to_u64().unwrap(), modulus: self.0 }
        }
    }

    /// Maps a rational into the field; fails if the denominator vanishes mod p.
    pub fn from_rational(self, v: &BigRational) -> Result<Scalar, ScalarError> {
        if self.0 == 0 {
            return Ok(Scalar::Rational(v.clone()));
        }
        let num = self.from_bigint(v.numer());
        let den = self.from_bigint(v.denom());
        if den.is_zero() {
            return Err(ScalarError::NonInvertible(v.to_string()));
        }
        Ok(num.div(&den))
    }

    /// Parses a decimal integer or an `a/b` fraction.
    pub fn parse_scalar(self, text: &str) -> Result<Scalar, ScalarError> {
        let t = text.trim();
        let parse_int =
            |s: &str| s.trim().parse::<BigInt>().map_err(|_| ScalarError::Parse(text.to_string()));
        let q = match t.split_once('/') {
            Some((a, b)) => {
                let den = parse_int(b)?;
                if den.is_zero() {
                    return Err(ScalarError::Parse(text.to_string()));
                }
                BigRational::new(parse_int(a)?, den)
            }
            None => BigRational::from_integer(parse_int(t)?),
        };
        self.from_rational(&q)
    }
}

impl TryFrom<u64> for Characteristic {
    type Error = ScalarError;
    fn try_from(p: u64) -> Result<Self, ScalarError> {
        Characteristic::new(p)
    }
}

impl From<Characteristic> for u64 {
    fn from(c: Characteristic) -> u64 {
        c.0
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u64;
    while i.saturating_mul(i) <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

/// An element of ℚ or of GF(p). Arithmetic between scalars of different
/// characteristics is a logic error and panics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Residue { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn characteristic(&self) -> Characteristic {
        match self {
            Scalar::Rational(_) => Characteristic(0),
            Scalar::Residue { modulus, .. } => Characteristic(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_one(),
            Scalar::Residue { value, .. } => *value == 1,
        }
    }

    fn same(&self, other: &Scalar) -> u64 {
        let (a, b) = (self.characteristic(), other.characteristic());
        assert_eq!(a, b, "mixing scalars of characteristic {a} and {b}");
        a.0
    }

    pub fn inv(&self) -> Scalar {
        assert!(!self.is_zero(), "inverse of zero");
        match self {
            Scalar::Rational(q) => Scalar::Rational(q.recip()),
            Scalar::Residue { value, modulus } => {
                Scalar::Residue { value: inv_mod(*value, *modulus), modulus: *modulus }
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        self * &other.inv()
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = self.characteristic().one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Text form: residues as `0..p-1`, rationals as `a` or `a/b`.
    pub fn to_text(&self) -> String {
        match self {
            Scalar::Rational(q) => {
                if q.denom().is_one() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Residue { value, .. } => value.to_string(),
        }
    }

    /// Symmetric integer lift for residues (−p/2 < v ≤ p/2); rationals are
    /// returned as is.
    pub fn to_rational_lift(&self) -> BigRational {
        match self {
            Scalar::Rational(q) => q.clone(),
            Scalar::Residue { value, modulus } => {
                let v = if *value > modulus / 2 { *value as i128 - *modulus as i128 } else { *value as i128 };
                BigRational::from_integer(BigInt::from(v))
            }
        }
    }

    /// Residue value (for prime characteristic only).
    pub fn residue(&self) -> u64 {
        match self {
            Scalar::Residue { value, .. } => *value,
            Scalar::Rational(_) => panic!("residue() on a rational scalar"),
        }
    }

    pub fn rational(&self) -> &BigRational {
        match self {
            Scalar::Rational(q) => q,
            Scalar::Residue { .. } => panic!("rational() on a residue"),
        }
    }

    pub fn is_negative_lift(&self) -> bool {
        self.to_rational_lift().is_negative()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

#[derive(Serialize, Deserialize)]
struct ScalarJson {
    #[serde(rename = "char")]
    chr: Characteristic,
    value: String,
}

/// Serialized as `{"char": p, "value": "a/b"}`.
impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ScalarJson { chr: self.characteristic(), value: self.to_text() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let j = ScalarJson::deserialize(d)?;
        j.chr.parse_scalar(&j.value).map_err(serde::de::Error::custom)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        let p = self.same(o);
        match (self, o) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Residue { value: a, .. }, Scalar::Residue { value: b, .. }) => {
                Scalar::Residue { value: add_mod(*a, *b, p), modulus: p }
            }
            _ => unreachable!(),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self + &(-o)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        let p = self.same(o);
        match (self, o) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Residue { value: a, .. }, Scalar::Residue { value: b, .. }) => {
                Scalar::Residue { value: mul_mod(*a, *b, p), modulus: p }
            }
            _ => unreachable!(),
        }
    }
}

impl<'a> Neg for &'a Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Residue { value, modulus } => {
                Scalar::Residue { value: (modulus - value) % modulus, modulus: *modulus }
            }
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        &self + &o
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        &self - &o
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "inverse of zero modulo {p}");
    pow_mod(a, p - 2, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn characteristic_validation() {
        assert!(Characteristic::new(4).is_err());
        assert!(Characteristic::new(1).is_err());
        assert_eq!(Characteristic::new(7).unwrap().value(), 7);
        assert!(Characteristic::new(0).unwrap().is_zero());
    }

    #[test]
    fn residue_arithmetic_follows_the_field() {
        let f3 = Characteristic::of(3);
        assert_eq!(f3.from_i64(-1), f3.from_i64(2));
        let f2 = Characteristic::of(2);
        assert!(f2.from_i64(2).is_zero());
        let a = f3.from_i64(2);
        assert_eq!(&a * &a.inv(), f3.one());
        assert_eq!(f3.parse_scalar("1/2").unwrap(), f3.from_i64(2));
        assert!(f3.parse_scalar("1/3").is_err());
    }

    #[test]
    fn rational_text_round_trip() {
        let q = Characteristic::ZERO;
        let x = q.parse_scalar("-6/4").unwrap();
        assert_eq!(x.to_text(), "-3/2");
        assert_eq!(q.parse_scalar(&x.to_text()).unwrap(), x);
        assert_eq!((&x + &q.from_i64(2)).to_text(), "1/2");
    }

    #[test]
    fn symmetric_lift() {
        let f5 = Characteristic::of(5);
        assert_eq!(f5.from_i64(4).to_rational_lift(), BigRational::from_integer((-1).into()));
        assert_eq!(f5.from_i64(2).to_rational_lift(), BigRational::from_integer(2.into()));
    }
}
