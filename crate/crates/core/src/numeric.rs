//! Scalar values carried by numeric fluents.
//!
//! Everything above this module is generic over [`Scalar`]. The crate root
//! fixes the default to exact rationals; `f64`/`f32` instantiations exist for
//! callers that prefer speed over bit-exact comparisons.

use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive, Zero};

/// Numeric value type for fluents and constants.
pub trait Scalar:
    Num + Clone + PartialOrd + fmt::Debug + Send + Sync + 'static
{
    /// Parses a PDDL numeric literal: `5`, `-3`, `2.5`, or `7/3`.
    fn parse_literal(text: &str) -> Option<Self>;

    /// Renders a literal that [`Scalar::parse_literal`] reads back exactly.
    fn to_literal(&self) -> String;

    /// Feeds a canonical encoding of the value to `state`.
    fn hash_scalar<H: Hasher>(&self, state: &mut H);

    fn to_f64(&self) -> f64;
}

fn split_decimal(text: &str) -> Option<(bool, &str, &str)> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((neg, int, frac))
}

impl Scalar for Ratio<i64> {
    fn parse_literal(text: &str) -> Option<Self> {
        if let Some((num, den)) = text.split_once('/') {
            let n: i64 = num.parse().ok()?;
            let d: i64 = den.parse().ok()?;
            if d == 0 {
                return None;
            }
            return Some(Ratio::new(n, d));
        }
        let (neg, int, frac) = split_decimal(text)?;
        let mut numer: i64 = 0;
        for b in int.bytes().chain(frac.bytes()) {
            numer = numer.checked_mul(10)?.checked_add(i64::from(b - b'0'))?;
        }
        let denom = 10i64.checked_pow(u32::try_from(frac.len()).ok()?)?;
        let value = Ratio::new(numer, denom);
        Some(if neg { -value } else { value })
    }

    fn to_literal(&self) -> String {
        if self.is_integer() {
            return self.numer().to_string();
        }
        // Terminating decimals print as decimals, everything else as n/d.
        let mut den = *self.denom();
        let (mut twos, mut fives) = (0u32, 0u32);
        while den % 2 == 0 {
            den /= 2;
            twos += 1;
        }
        while den % 5 == 0 {
            den /= 5;
            fives += 1;
        }
        if den != 1 {
            return format!("{}/{}", self.numer(), self.denom());
        }
        let digits = twos.max(fives);
        let scale = 10i128.pow(digits);
        let scaled = i128::from(*self.numer()) * scale / i128::from(*self.denom());
        let sign = if scaled < 0 { "-" } else { "" };
        let abs = scaled.unsigned_abs();
        let int = abs / scale as u128;
        let frac = abs % scale as u128;
        format!("{sign}{int}.{frac:0width$}", width = digits as usize)
    }

    fn hash_scalar<H: Hasher>(&self, state: &mut H) {
        // Ratio is always kept reduced, so (numer, denom) is canonical.
        self.numer().hash(state);
        self.denom().hash(state);
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn parse_literal(text: &str) -> Option<Self> {
                if let Some((num, den)) = text.split_once('/') {
                    let n: $t = num.parse().ok()?;
                    let d: $t = den.parse().ok()?;
                    if d.is_zero() {
                        return None;
                    }
                    return Some(n / d);
                }
                split_decimal(text)?;
                text.parse().ok()
            }

            fn to_literal(&self) -> String {
                if self.fract() == 0.0 && self.abs() < 1e15 {
                    format!("{}", *self as i64)
                } else {
                    format!("{}", self)
                }
            }

            fn hash_scalar<H: Hasher>(&self, state: &mut H) {
                // -0.0 and 0.0 compare equal, so they must hash equal.
                let v = if *self == 0.0 { 0.0 } else { *self };
                v.to_bits().hash(state);
            }

            fn to_f64(&self) -> f64 {
                f64::from(*self)
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Ratio<i64>;

    #[test]
    fn parses_rational_literals() {
        assert_eq!(Q::parse_literal("5"), Some(Q::from_integer(5)));
        assert_eq!(Q::parse_literal("-3"), Some(Q::from_integer(-3)));
        assert_eq!(Q::parse_literal("2.5"), Some(Q::new(5, 2)));
        assert_eq!(Q::parse_literal("7/3"), Some(Q::new(7, 3)));
        assert_eq!(Q::parse_literal(".5"), Some(Q::new(1, 2)));
        assert_eq!(Q::parse_literal("1/0"), None);
        assert_eq!(Q::parse_literal("abc"), None);
        assert_eq!(Q::parse_literal("-"), None);
    }

    #[test]
    fn rational_literals_round_trip() {
        for v in [Q::new(1, 3), Q::new(-5, 4), Q::from_integer(90), Q::new(3, 40), Q::new(-1, 2)] {
            let text = v.to_literal();
            assert_eq!(Q::parse_literal(&text), Some(v), "{text}");
        }
        assert_eq!(Q::new(-5, 4).to_literal(), "-1.25");
        assert_eq!(Q::new(1, 3).to_literal(), "1/3");
    }

    #[test]
    fn float_literals() {
        assert_eq!(f64::parse_literal("2.5"), Some(2.5));
        assert_eq!(f64::parse_literal("1/4"), Some(0.25));
        assert_eq!(f64::parse_literal("inf"), None);
        assert_eq!(90.0f64.to_literal(), "90");
        assert_eq!(f32::parse_literal("3"), Some(3.0));
    }
}
