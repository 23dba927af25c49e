//! Scalar abstraction shared by the polynomial, zonal and certificate code.
//!
//! Exact work runs over [`Rational`]; verification-grade numerics (the
//! normalized zonal family, quadrature, kernels) run over `f64`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// A field element usable as a polynomial coefficient.
pub trait Scalar: Num + Clone + Debug + PartialOrd + Signed + Send + Sync + 'static {
    /// Embeds an exact rational. Lossy for floating point types.
    fn from_rational(q: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact rational value, `None` for non-finite floats.
    fn to_rational(&self) -> Option<Rational>;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    /// True for exact (non-rounding) scalar types.
    fn is_exact() -> bool;
}

impl Scalar for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Option<Rational> {
        Rational::from_f64(*self)
    }
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f32 {
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q) as f32
    }
    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
    fn to_rational(&self) -> Option<Rational> {
        Rational::from_f32(*self)
    }
    fn is_exact() -> bool {
        false
    }
}

/// Correctly scaled conversion that survives numerators and denominators
/// beyond the `f64` range.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = q.numer().bits().max(q.denom().bits()) as i64 - 60;
    let (n, d) = if shift > 0 {
        (q.numer() >> shift as usize, q.denom() >> shift as usize)
    } else {
        (q.numer().clone(), q.denom().clone())
    };
    if d.is_zero() {
        return if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0)
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Formats as `num/den`, the wire form used by every JSON artifact.
pub fn rational_to_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `num/den`, a bare integer, or a decimal literal (taken exactly).
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(Rational::from_integer(n));
    }
    // Decimal literal without exponent, e.g. "-0.125".
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if let Some((ip, fp)) = body.split_once('.') {
        if !ip.chars().all(|c| c.is_ascii_digit()) || !fp.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        if ip.is_empty() && fp.is_empty() {
            return None;
        }
        let digits: BigInt = format!("{ip}{fp}").parse().ok()?;
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let q = Rational::new(digits, den);
        return Some(if neg { -q } else { q });
    }
    None
}

pub fn one<T: Scalar>() -> T {
    T::one()
}

pub fn zero<T: Scalar>() -> T {
    T::zero()
}

/// Serde adapter writing a [`Rational`] as its `num/den` string.
pub mod rational_serde {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use super::{parse_rational, rational_to_string, Rational};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational_to_string(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}
