//! Extended-precision scalar.
//!
//! [`Hp`] wraps `num_bigfloat::BigFloat` (40 significant decimal digits,
//! normal range roughly `1e-88 .. 1e166`). The wrapped library can fail
//! inside multiplication when a result falls into its subnormal range, so
//! every operation here flushes results below the normal range to zero and
//! short-circuits products and quotients that would land there. For this
//! crate a flushed value is always negligible: tiny numbers only arise as
//! far tails of weights and wavefunctions.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_bigfloat::BigFloat;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

/// Decimal exponent below which values are flushed to zero.
const FLUSH_EXP10: i32 = -86;
/// `ln(10^FLUSH_EXP10)`, the matching cutoff for `exp`.
const FLUSH_LN: f64 = -198.0;

/// Extended-precision real number (about 40 significant digits).
#[derive(Clone, Copy, Default)]
pub struct Hp(pub BigFloat);

/// Decimal exponent of the leading digit of a finite nonzero value.
fn exp10(x: &BigFloat) -> i32 {
    x.get_exponent() as i32 + x.get_mantissa_len() as i32 - 1
}

fn flush(x: BigFloat) -> Hp {
    if x.is_nan() || x.is_inf() || x.is_zero() {
        return Hp(x);
    }
    if x.is_subnormal() || exp10(&x) < FLUSH_EXP10 {
        Hp(num_bigfloat::ZERO)
    } else {
        Hp(x)
    }
}

fn finite_nonzero(x: &BigFloat) -> bool {
    !(x.is_nan() || x.is_inf() || x.is_zero())
}

impl Hp {
    pub fn from_big(x: BigFloat) -> Self {
        flush(x)
    }

    pub fn parse(s: &str) -> Option<Self> {
        BigFloat::parse(s).map(flush)
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }

    pub fn is_inf(&self) -> bool {
        self.0.is_inf()
    }
}

impl fmt::Display for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl PartialEq for Hp {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Hp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Add for Hp {
    type Output = Hp;
    fn add(self, rhs: Hp) -> Hp {
        flush(self.0.add(&rhs.0))
    }
}

impl Sub for Hp {
    type Output = Hp;
    fn sub(self, rhs: Hp) -> Hp {
        flush(self.0.sub(&rhs.0))
    }
}

impl Mul for Hp {
    type Output = Hp;
    fn mul(self, rhs: Hp) -> Hp {
        if finite_nonzero(&self.0)
            && finite_nonzero(&rhs.0)
            && exp10(&self.0) + exp10(&rhs.0) < FLUSH_EXP10
        {
            return Hp::zero();
        }
        flush(self.0.mul(&rhs.0))
    }
}

impl Div for Hp {
    type Output = Hp;
    fn div(self, rhs: Hp) -> Hp {
        if finite_nonzero(&self.0)
            && finite_nonzero(&rhs.0)
            && exp10(&self.0) - exp10(&rhs.0) < FLUSH_EXP10
        {
            return Hp::zero();
        }
        flush(self.0.div(&rhs.0))
    }
}

impl Rem for Hp {
    type Output = Hp;
    fn rem(self, rhs: Hp) -> Hp {
        flush(BigFloat::rem(&self.0, &rhs.0))
    }
}

impl Neg for Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp(self.0.inv_sign())
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Hp {
            fn $m(&mut self, rhs: Hp) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);

impl Zero for Hp {
    fn zero() -> Self {
        Hp(num_bigfloat::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Hp {
    fn one() -> Self {
        Hp(num_bigfloat::ONE)
    }
}

impl Num for Hp {
    type FromStrRadixErr = <BigFloat as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        BigFloat::from_str_radix(s, radix).map(flush)
    }
}

impl ToPrimitive for Hp {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.0.to_f64())
    }
}

impl NumCast for Hp {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        <BigFloat as NumCast>::from(n).map(flush)
    }
}

impl FromPrimitive for Hp {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Hp(BigFloat::from_i64(n)))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Hp(BigFloat::from_u64(n)))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(flush(BigFloat::from_f64(n)))
    }
}

macro_rules! unary {
    ($($name:ident),*) => {
        $(fn $name(self) -> Self { flush(Float::$name(self.0)) })*
    };
}

impl Float for Hp {
    fn nan() -> Self {
        Hp(num_bigfloat::NAN)
    }
    fn infinity() -> Self {
        Hp(num_bigfloat::INF_POS)
    }
    fn neg_infinity() -> Self {
        Hp(num_bigfloat::INF_NEG)
    }
    fn neg_zero() -> Self {
        Hp::zero()
    }
    fn min_value() -> Self {
        Hp(num_bigfloat::MIN)
    }
    fn min_positive_value() -> Self {
        Hp(BigFloat::parse("1e-85").expect("literal"))
    }
    fn epsilon() -> Self {
        Hp(BigFloat::parse("1e-39").expect("literal"))
    }
    fn max_value() -> Self {
        Hp(num_bigfloat::MAX)
    }
    fn is_nan(self) -> bool {
        self.0.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.0.is_inf()
    }
    fn is_finite(self) -> bool {
        !(self.0.is_inf() || self.0.is_nan())
    }
    fn is_normal(self) -> bool {
        self.is_finite() && !self.0.is_zero()
    }
    fn classify(self) -> FpCategory {
        self.0.classify()
    }
    fn is_sign_positive(self) -> bool {
        Float::is_sign_positive(self.0)
    }
    fn is_sign_negative(self) -> bool {
        Float::is_sign_negative(self.0)
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Hp::one() / self
    }
    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Hp::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }
    fn powf(self, n: Self) -> Self {
        if self.0.is_zero() || !self.is_finite() || !n.is_finite() {
            return flush(Float::powf(self.0, n.0));
        }
        if self.0.is_positive() {
            return (n * self.ln()).exp();
        }
        flush(Float::powf(self.0, n.0))
    }
    fn exp(self) -> Self {
        if self.is_finite() && self.0.to_f64() < FLUSH_LN {
            return Hp::zero();
        }
        flush(Float::exp(self.0))
    }
    fn exp2(self) -> Self {
        (self * Hp(num_bigfloat::LN_2)).exp()
    }
    fn exp_m1(self) -> Self {
        if self.abs().0.to_f64() < 1e-3 {
            // Taylor series avoids cancellation.
            let mut term = self;
            let mut acc = self;
            for k in 2..40 {
                term = term * self / Hp::from_i64(k).unwrap();
                acc = acc + term;
            }
            return acc;
        }
        self.exp() - Hp::one()
    }
    fn ln_1p(self) -> Self {
        if self.abs().0.to_f64() < 1e-3 {
            let mut pw = self;
            let mut acc = Hp::zero();
            for k in 1..40 {
                let t = pw / Hp::from_i64(k).unwrap();
                acc = if k % 2 == 1 { acc + t } else { acc - t };
                pw = pw * self;
            }
            return acc;
        }
        (Hp::one() + self).ln()
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn max(self, other: Self) -> Self {
        if self.is_nan() {
            return other;
        }
        if other.is_nan() {
            return self;
        }
        if self >= other {
            self
        } else {
            other
        }
    }
    fn min(self, other: Self) -> Self {
        if self.is_nan() {
            return other;
        }
        if other.is_nan() {
            return self;
        }
        if self <= other {
            self
        } else {
            other
        }
    }
    #[allow(deprecated)]
    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            Hp::zero()
        }
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }
    fn atan2(self, other: Self) -> Self {
        flush(Float::atan2(self.0, other.0))
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        Float::integer_decode(self.0)
    }
    unary!(
        floor, ceil, round, trunc, fract, abs, signum, sqrt, ln, log2, log10, cbrt, sin, cos, tan,
        asin, acos, atan, sinh, cosh, tanh, asinh, acosh, atanh
    );
}

impl FloatConst for Hp {
    fn E() -> Self {
        Hp(num_bigfloat::E)
    }
    fn FRAC_1_PI() -> Self {
        Hp(num_bigfloat::FRAC_1_PI)
    }
    fn FRAC_1_SQRT_2() -> Self {
        Hp(num_bigfloat::FRAC_1_SQRT_2)
    }
    fn FRAC_2_PI() -> Self {
        Hp(num_bigfloat::FRAC_2_PI)
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Hp(num_bigfloat::FRAC_2_SQRT_PI)
    }
    fn FRAC_PI_2() -> Self {
        Hp(num_bigfloat::HALF_PI)
    }
    fn FRAC_PI_3() -> Self {
        Hp(num_bigfloat::FRAC_PI_3)
    }
    fn FRAC_PI_4() -> Self {
        Hp(num_bigfloat::FRAC_PI_4)
    }
    fn FRAC_PI_6() -> Self {
        Hp(num_bigfloat::FRAC_PI_6)
    }
    fn FRAC_PI_8() -> Self {
        Hp(num_bigfloat::FRAC_PI_8)
    }
    fn LN_10() -> Self {
        Hp(num_bigfloat::LN_10)
    }
    fn LN_2() -> Self {
        Hp(num_bigfloat::LN_2)
    }
    fn LOG10_E() -> Self {
        Hp(num_bigfloat::LOG10_E)
    }
    fn LOG2_E() -> Self {
        Hp(num_bigfloat::LOG2_E)
    }
    fn PI() -> Self {
        Hp(num_bigfloat::PI)
    }
    fn SQRT_2() -> Self {
        Hp(num_bigfloat::SQRT_2)
    }
}
