//! Coefficient fields used by forms and matrices.
//!
//! Two modes are supported: exact rationals ([`Rational`]) and `f64`.
//! Complex coefficients (`Complex<S>`) over either mode are used for the
//! elliptic decomposition and the holomorphic volume form.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// A field of coefficients.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True for exact arithmetic; zero tests then ignore tolerances.
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Absolute value (modulus for complex scalars) as a float.
    fn magnitude(&self) -> f64;

    /// Zero test used by elimination routines: exact in exact mode,
    /// `|x| <= tol` in float mode.
    fn is_negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }
}

/// An ordered field: signs, absolute values and (partial) square roots.
pub trait RealScalar: Scalar + PartialOrd + Num {
    fn to_f64(&self) -> f64;

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Square root of a non-negative value, when it exists in the field.
    /// Rationals only have one when numerator and denominator are squares.
    fn sqrt_checked(&self) -> Option<Self>;

    /// Sign as -1, 0 or 1, with `tol` applied in float mode.
    fn sign(&self, tol: f64) -> i32 {
        if self.is_negligible(tol) {
            0
        } else if *self > Self::zero() {
            1
        } else {
            -1
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY)
    }
}

impl RealScalar for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt_checked(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = exact_isqrt(self.numer())?;
        let d = exact_isqrt(self.denom())?;
        Some(Rational::new(n, d))
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl RealScalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_checked(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
}

impl<S: RealScalar> Scalar for Complex<S> {
    const EXACT: bool = S::EXACT;

    fn from_i64(n: i64) -> Self {
        Complex::new(S::from_i64(n), S::zero())
    }

    fn magnitude(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }

    fn is_negligible(&self, tol: f64) -> bool {
        if S::EXACT {
            self.re.is_zero() && self.im.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }
}

/// Converts an exact rational to its float value.
pub fn to_float(q: &Rational) -> f64 {
    RealScalar::to_f64(q)
}

/// Formats a rational as `"p/q"` (or `"p"` for integers).
pub fn rational_to_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.25"` exactly.
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
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 64 {
            return None;
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = match int {
            "" | "-" | "+" => BigInt::zero(),
            _ => int.parse().ok()?,
        };
        let frac_part: BigInt = frac.parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rational::new(int_part.abs() * &scale + frac_part, scale);
        return Some(if negative { -mag } else { mag });
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// A reported number: exact rationals serialize as `"p/q"` strings,
/// floats as JSON numbers.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(q) => to_float(q),
            Number::Float(x) => *x,
        }
    }
}

impl serde::Serialize for Number {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        match self {
            Number::Exact(q) => s.serialize_str(&rational_to_string(q)),
            Number::Float(x) => s.serialize_f64(*x),
        }
    }
}
