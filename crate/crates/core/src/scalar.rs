//! Scalar abstraction for probability weights.
//!
//! Distributions, enumerations and bounds are written once against
//! [`Probability`] and instantiated with `f64`, `f32`, or the exact
//! [`Rational`] type. Entropies are always reported as `f64` bits; only the
//! weights themselves carry the chosen arithmetic.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

/// Arbitrary-precision rational number used for exact weights.
pub type Rational = num_rational::BigRational;

/// Which arithmetic a computation was carried out in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arithmetic {
    Rational,
    Float,
}

pub trait Probability:
    Num + Clone + PartialOrd + Debug + ToPrimitive + FromPrimitive + Send + Sync + 'static
{
    /// `true` when arithmetic on this type is exact.
    const EXACT: bool;

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Text form used in reports: decimal for floats, `a/b` for rationals.
    fn render(&self) -> String;

    /// Parses `"0.25"`, `"1/4"` or `"1"`.
    fn parse_prob(text: &str) -> Option<Self>;

    fn arithmetic() -> Arithmetic {
        if Self::EXACT {
            Arithmetic::Rational
        } else {
            Arithmetic::Float
        }
    }

    /// `2^-k` in this arithmetic.
    fn pow2_neg(k: u32) -> Self {
        let mut out = Self::one();
        let two = Self::one() + Self::one();
        for _ in 0..k {
            out = out / two.clone();
        }
        out
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num).expect("representable") / Self::from_u64(den).expect("representable")
    }
}

fn parse_float_like<T: FromStr + Num + Clone>(text: &str) -> Option<T> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        let a: T = a.trim().parse().ok()?;
        let b: T = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        Some(a / b)
    } else {
        text.parse().ok()
    }
}

impl Probability for f64 {
    const EXACT: bool = false;

    fn render(&self) -> String {
        format!("{self}")
    }

    fn parse_prob(text: &str) -> Option<Self> {
        parse_float_like(text)
    }
}

impl Probability for f32 {
    const EXACT: bool = false;

    fn render(&self) -> String {
        format!("{self}")
    }

    fn parse_prob(text: &str) -> Option<Self> {
        parse_float_like(text)
    }
}

impl Probability for Rational {
    const EXACT: bool = true;

    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn parse_prob(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((a, b)) = text.split_once('/') {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                return None;
            }
            return Some(Rational::new(a, b));
        }
        parse_decimal(text)
    }
}

/// Exact decimal parsing: `"0.125"` becomes `1/8`.
fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10u8), frac_part.len());
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Absolute difference without requiring a signed type.
pub fn abs_diff<P: Probability>(a: &P, b: &P) -> P {
    if a >= b {
        a.clone() - b.clone()
    } else {
        b.clone() - a.clone()
    }
}

/// Converts an `f64` that is known to be a dyadic or short decimal into the
/// exact rational it denotes.
pub fn rational_from_f64(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

pub(crate) fn is_negative<P: Probability>(value: &P) -> bool {
    *value < P::zero()
}
