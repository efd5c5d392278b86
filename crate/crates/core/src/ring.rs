//! Coefficient rings: GF(2), the rationals and the integers.
//!
//! All algebra in the crate is exact. GF(2) is a single bit, the rationals
//! and integers are arbitrary precision.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Runtime tag naming a coefficient ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    #[serde(rename = "gf2")]
    Gf2,
    #[serde(rename = "q")]
    Rational,
    #[serde(rename = "z")]
    Integer,
}

impl Ring {
    pub fn is_field(self) -> bool {
        !matches!(self, Ring::Integer)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Ring::Gf2 => "gf2",
            Ring::Rational => "q",
            Ring::Integer => "z",
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ring {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gf2" | "f2" | "z2" => Ok(Ring::Gf2),
            "q" | "rational" | "rationals" => Ok(Ring::Rational),
            "z" | "integer" | "integers" => Ok(Ring::Integer),
            other => Err(format!("unknown ring `{other}` (expected gf2, q or z)")),
        }
    }
}

/// Commutative ring of coefficients.
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    const RING: Ring;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_i64(v: i64) -> Self;

    /// Textual form used by the JSON formats (`"1"`, `"-3/4"`).
    fn to_repr(&self) -> String;
    fn parse_repr(s: &str) -> Option<Self>;

    /// Coerces a rational literal into the ring, if it belongs to it.
    fn from_rational(q: &BigRational) -> Option<Self>;

    fn add_assign(&mut self, other: &Self) {
        *self = self.add(other);
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

/// Coefficient ring that is a field.
pub trait Field: Coeff {
    fn inv(&self) -> Self;

    fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }
}

/// The field with two elements.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Gf2(bool);

impl Gf2 {
    pub const ZERO: Gf2 = Gf2(false);
    pub const ONE: Gf2 = Gf2(true);

    pub fn new(bit: bool) -> Self {
        Gf2(bit)
    }

    pub fn bit(self) -> bool {
        self.0
    }
}

impl fmt::Debug for Gf2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(self.0))
    }
}

impl Coeff for Gf2 {
    const RING: Ring = Ring::Gf2;

    fn zero() -> Self {
        Gf2::ZERO
    }
    fn one() -> Self {
        Gf2::ONE
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
    fn add(&self, other: &Self) -> Self {
        Gf2(self.0 ^ other.0)
    }
    fn sub(&self, other: &Self) -> Self {
        Gf2(self.0 ^ other.0)
    }
    fn mul(&self, other: &Self) -> Self {
        Gf2(self.0 & other.0)
    }
    fn neg(&self) -> Self {
        *self
    }
    fn from_i64(v: i64) -> Self {
        Gf2(v.rem_euclid(2) == 1)
    }
    fn to_repr(&self) -> String {
        u8::from(self.0).to_string()
    }
    fn parse_repr(s: &str) -> Option<Self> {
        BigInt::from_str(s.trim())
            .ok()
            .map(|v| Gf2(One::is_one(&(v % 2u8).abs())))
    }
    fn from_rational(q: &BigRational) -> Option<Self> {
        if !q.is_integer() {
            return None;
        }
        let r = q.to_integer() % 2u8;
        Some(Gf2(!Zero::is_zero(&r)))
    }
}

impl Field for Gf2 {
    fn inv(&self) -> Self {
        assert!(self.0, "inverse of zero in GF(2)");
        *self
    }
}

impl Coeff for BigRational {
    const RING: Ring = Ring::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_repr(&self) -> String {
        self.to_string()
    }
    fn parse_repr(s: &str) -> Option<Self> {
        BigRational::from_str(s.trim()).ok()
    }
    fn from_rational(q: &BigRational) -> Option<Self> {
        Some(q.clone())
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
}

impl Field for BigRational {
    fn inv(&self) -> Self {
        self.recip()
    }
}

impl Coeff for BigInt {
    const RING: Ring = Ring::Integer;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn to_repr(&self) -> String {
        self.to_string()
    }
    fn parse_repr(s: &str) -> Option<Self> {
        BigInt::from_str(s.trim()).ok()
    }
    fn from_rational(q: &BigRational) -> Option<Self> {
        q.is_integer().then(|| q.to_integer())
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
}

/// Best-effort conversion of a coefficient to `f64` for display.
pub fn approx_f64<F: Coeff>(c: &F) -> f64 {
    let repr = c.to_repr();
    BigRational::from_str(&repr)
        .ok()
        .and_then(|q| q.numer().to_f64().zip(q.denom().to_f64()))
        .map(|(n, d)| n / d)
        .unwrap_or(f64::NAN)
}
