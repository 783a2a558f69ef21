//! The scalar abstraction every numerical routine is written against.

use std::fmt::{Debug, Display};

use crate::hp::Hp;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// A real floating-point type usable by every routine in the crate.
///
/// Implemented for `f32`, `f64` and the 40-digit decimal [`Hp`].
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Unit roundoff of the type.
    ///
    /// The extended type needs its own machine epsilon, so this is kept
    /// separate from the `num_traits` method on purpose.
    fn eps() -> Self;

    /// Parse a decimal literal without passing through `f64`.
    fn parse_decimal(s: &str) -> Option<Self>;

    /// Scientific notation with `digits` significant digits.
    fn to_sci(&self, digits: usize) -> String;

    /// Significant decimal digits carried by the type.
    fn digits() -> usize;
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn to_sci(&self, digits: usize) -> String {
        format!("{:.*e}", digits.saturating_sub(1), self)
    }
    fn digits() -> usize {
        16
    }
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn to_sci(&self, digits: usize) -> String {
        format!("{:.*e}", digits.saturating_sub(1), self)
    }
    fn digits() -> usize {
        7
    }
}

impl Real for Hp {
    fn eps() -> Self {
        Hp::parse("1e-39").expect("literal")
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        let t = s.trim();
        // The decimal parser rejects a leading '+' and some exponent spellings.
        let t = t.strip_prefix('+').unwrap_or(t);
        let normalized = t.replace('E', "e").replace("e+", "e");
        Hp::parse(&normalized).filter(|v| !v.is_nan())
    }
    fn to_sci(&self, digits: usize) -> String {
        if self.is_nan() {
            return "NaN".into();
        }
        if self.is_inf() {
            return if self.is_sign_negative() {
                "-inf".into()
            } else {
                "inf".into()
            };
        }
        round_decimal_string(&self.to_string(), digits)
    }
    fn digits() -> usize {
        39
    }
}

/// Round a decimal string such as `-1.2345e-7` or `12.5` to `digits`
/// significant digits and render it in scientific notation.
fn round_decimal_string(s: &str, digits: usize) -> String {
    let digits = digits.max(1);
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let all: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes())
        .map(|b| b - b'0')
        .collect();
    let Some(first) = all.iter().position(|&d| d != 0) else {
        return if digits == 1 {
            "0e0".into()
        } else {
            format!("0.{}e0", "0".repeat(digits - 1))
        };
    };
    // Decimal exponent of the leading nonzero digit.
    let mut e10 = exp + int_part.len() as i64 - 1 - first as i64;
    let mut sig: Vec<u8> = all[first..].to_vec();
    sig.resize(sig.len().max(digits + 1), 0);
    let round_up = sig[digits] >= 5;
    sig.truncate(digits);
    if round_up {
        let mut i = digits;
        loop {
            if i == 0 {
                sig.insert(0, 1);
                sig.truncate(digits);
                e10 += 1;
                break;
            }
            i -= 1;
            if sig[i] == 9 {
                sig[i] = 0;
            } else {
                sig[i] += 1;
                break;
            }
        }
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push((b'0' + sig[0]) as char);
    if digits > 1 {
        out.push('.');
        out.extend(sig[1..].iter().map(|&d| (b'0' + d) as char));
    }
    out.push('e');
    out.push_str(&e10.to_string());
    out
}

/// Convert an `f64` literal into the working type.
#[inline]
pub fn c<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("every Real accepts f64 input")
}

/// Convert an integer into the working type.
#[inline]
pub fn ci<T: Real>(n: i64) -> T {
    T::from_i64(n).expect("every Real accepts i64 input")
}

/// Lossy conversion to `f64` for reporting and for seeding iterations.
#[inline]
pub fn f<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Convert between two `Real` types through the decimal representation so
/// that no digits are lost when widening.
pub fn convert<S: Real, T: Real>(x: S) -> T {
    if S::digits() <= 16 {
        return c(f(x));
    }
    T::parse_decimal(&x.to_sci(S::digits())).unwrap_or_else(|| c(f(x)))
}
