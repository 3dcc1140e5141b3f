//! Scalar abstraction shared by the geometric, temporal and cost kernels.
//!
//! Every numeric kernel in this crate is written against [`Scalar`] so the
//! same code runs on `f32`, `f64`, and exact rationals ([`Rational64`]). The
//! rational instantiation is what the tests use when a result has to be
//! exact rather than "close".

use std::fmt::Debug;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Num, ToPrimitive};

/// Numeric type accepted by the evaluation, statistics and cost kernels.
pub trait Scalar: Num + PartialOrd + Copy + Debug + Send + Sync + 'static {
    /// Converts from `f64`. Exact for floats; rationals take the closest
    /// small-denominator approximation.
    fn from_f64(v: f64) -> Self;

    fn to_f64(self) -> f64;

    /// Rounds to the nearest integer, halves away from zero.
    fn round_half_up(self) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `false` for NaN and infinities; always `true` for rationals.
    fn is_finite_value(self) -> bool {
        self.to_f64().is_finite()
    }

    /// Parses a plain decimal literal such as `3.25` or `-17`.
    fn parse_decimal(s: &str) -> Option<Self>;
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_f64(v: f64) -> Self {
                v as $t
            }

            fn to_f64(self) -> f64 {
                self as f64
            }

            fn round_half_up(self) -> Self {
                self.round()
            }

            fn is_finite_value(self) -> bool {
                self.is_finite()
            }

            fn parse_decimal(s: &str) -> Option<Self> {
                <$t>::from_str(s.trim()).ok().filter(|v| v.is_finite())
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for Rational64 {
    fn from_f64(v: f64) -> Self {
        // Integers and short decimals come through exactly via the decimal
        // parser; anything else falls back to continued fractions.
        if let Some(r) = Self::parse_decimal(&format!("{v}")) {
            return r;
        }
        Rational64::approximate_float(v).unwrap_or_else(|| Rational64::from_integer(0))
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn from_usize(n: usize) -> Self {
        Rational64::from_integer(n as i64)
    }

    fn round_half_up(self) -> Self {
        self.round()
    }

    fn is_finite_value(self) -> bool {
        true
    }

    fn parse_decimal(s: &str) -> Option<Self> {
        parse_decimal_ratio(s)
    }
}

fn parse_decimal_ratio(s: &str) -> Option<Rational64> {
    let s = s.trim();
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut numer: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        numer = numer.checked_mul(10)?.checked_add(i64::from(b - b'0'))?;
    }
    let denom = 10i64.checked_pow(u32::try_from(frac_part.len()).ok()?)?;
    let r = Rational64::new(numer, denom);
    Some(if negative { -r } else { r })
}
