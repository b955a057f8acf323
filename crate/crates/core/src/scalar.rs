//! Field abstraction shared by the exact (`BigRational`) and floating (`f64`) pipelines.

use core::cmp::Ordering;
use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Relative tolerance used for tie detection in floating mode.
pub const TIE_TOL: f64 = 1e-12;

/// Ordered field used by the generic algorithms.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True for exact arithmetic.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    /// Exact for rationals (every finite `f64` is a dyadic rational).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Natural log of `|self|`, accurate even when `self` lies outside the `f64` range.
    fn ln_abs(&self) -> f64;
    fn floor_int(&self) -> BigInt;
    fn abs_val(&self) -> Self;
    /// Some `e` with `|self| < 2^e` and `|self| >= 2^(e-2)`; used for rescaling.
    fn log2_magnitude(&self) -> i64;
    /// `self * 2^(-shift)` as `f64`.
    fn to_f64_scaled(&self, shift: i64) -> f64;

    fn round_int(&self) -> BigInt {
        let half = Self::one() / Self::from_i64(2);
        (self.clone() + half).floor_int()
    }

    fn vanishes(&self) -> bool {
        *self == Self::zero()
    }

    /// Comparison with the tie rule: exact for rationals, within `TIE_TOL` (relative) for floats.
    fn cmp_tie(&self, other: &Self) -> Ordering;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_bigint(v: &BigInt) -> Self {
        bigint_to_f64(v)
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn ln_abs(&self) -> f64 {
        libm::log(libm::fabs(*self))
    }
    fn floor_int(&self) -> BigInt {
        f64_to_bigint(libm::floor(*self))
    }
    fn abs_val(&self) -> Self {
        libm::fabs(*self)
    }
    fn log2_magnitude(&self) -> i64 {
        if *self == 0.0 {
            0
        } else {
            libm::ilogb(*self) as i64 + 1
        }
    }
    fn to_f64_scaled(&self, shift: i64) -> f64 {
        libm::ldexp(*self, -(shift.clamp(-4000, 4000) as i32))
    }
    fn round_int(&self) -> BigInt {
        f64_to_bigint(libm::floor(*self + 0.5))
    }
    fn cmp_tie(&self, other: &Self) -> Ordering {
        let scale = 1.0f64.max(libm::fabs(*self)).max(libm::fabs(*other));
        if libm::fabs(self - other) <= TIE_TOL * scale {
            Ordering::Equal
        } else if self < other {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_bigint(v: &BigInt) -> Self {
        Rational::from_integer(v.clone())
    }
    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn ln_abs(&self) -> f64 {
        ln_abs_bigint(self.numer()) - ln_abs_bigint(self.denom())
    }
    fn floor_int(&self) -> BigInt {
        self.numer().div_floor(self.denom())
    }
    fn abs_val(&self) -> Self {
        Signed::abs(self)
    }
    fn log2_magnitude(&self) -> i64 {
        rational_log2_ceil(self)
    }
    fn to_f64_scaled(&self, shift: i64) -> f64 {
        scaled_rational_to_f64(self, shift)
    }
    fn round_int(&self) -> BigInt {
        let two = BigInt::from(2);
        (self.numer() * &two + self.denom()).div_floor(&(self.denom() * two))
    }
    fn cmp_tie(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

fn f64_to_bigint(v: f64) -> BigInt {
    if let Some(i) = v.to_i64() {
        return BigInt::from(i);
    }
    let r = Rational::from_float(v).expect("finite float");
    r.to_integer()
}

/// `ln |x|` for a big integer without overflow.
pub fn ln_abs_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return libm::log(libm::fabs(bigint_to_f64(x)));
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    libm::log(bigint_to_f64(&top)) + shift as f64 * core::f64::consts::LN_2
}

pub fn bigint_to_f64(x: &BigInt) -> f64 {
    match x.to_f64() {
        Some(v) => v,
        None => {
            if x.sign() == Sign::Minus {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        }
    }
}

/// Rational to nearest-ish `f64` that survives huge numerators and denominators.
pub fn rational_to_f64(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    scaled_rational_to_f64(x, 0)
}

/// `x * 2^(-shift)` as `f64`, computed from a 64-bit quotient so that no intermediate overflows.
pub fn scaled_rational_to_f64(x: &Rational, shift: i64) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let p = x.numer().abs();
    let q = x.denom().clone();
    // choose a so that (p << a) / q has about 64 significant bits
    let a: i64 = 64 + q.bits() as i64 - p.bits() as i64;
    let quotient = if a >= 0 {
        (p << (a as u64)) / &q
    } else {
        p / (q << ((-a) as u64))
    };
    let mantissa = bigint_to_f64(&quotient);
    let exp = -a - shift;
    let v = libm::ldexp(mantissa, exp.clamp(i32::MIN as i64, i32::MAX as i64) as i32);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// Binary exponent `e` with `2^(e-1) <= |x| < 2^e` (approximately), used for rescaling.
pub fn rational_log2_ceil(x: &Rational) -> i64 {
    if x.is_zero() {
        return i64::MIN / 4;
    }
    x.numer().bits() as i64 - x.denom().bits() as i64 + 1
}

/// Integer square root test: returns `Some(r)` when `x = r^2` for a rational `r >= 0`.
pub fn rational_sqrt_exact(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let p = x.numer().sqrt();
    let q = x.denom().sqrt();
    if &(&p * &p) == x.numer() && &(&q * &q) == x.denom() {
        Some(Rational::new(p, q))
    } else {
        None
    }
}

/// Parses `"p/q"`, integers and plain decimals (`"-0.125"`, `"3e-2"`) into exact rationals.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut all = alloc::string::String::from(int_part);
    all.push_str(frac_part);
    let n: BigInt = all.parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mut r = if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

/// Formats a rational as `"p/q"` (or `"p"` for integers).
pub fn format_rational(x: &Rational) -> alloc::string::String {
    if x.is_integer() {
        alloc::format!("{}", x.numer())
    } else {
        alloc::format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), Rational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-0.125").unwrap(), Rational::new((-1).into(), 8.into()));
        assert_eq!(parse_rational("2.5e1").unwrap(), Rational::from_integer(25.into()));
        assert_eq!(parse_rational("7").unwrap(), Rational::from_integer(7.into()));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
    }

    #[test]
    fn huge_rational_logs() {
        let big = Rational::from_integer(num_traits::pow(BigInt::from(262), 200));
        let expected = 200.0 * libm::log(262.0);
        assert!((big.ln_abs() - expected).abs() < 1e-9);
        let tiny = <Rational as Scalar>::one() / big;
        assert!((tiny.ln_abs() + expected).abs() < 1e-9);
    }

    #[test]
    fn rounding_matches_between_fields() {
        for v in [-2.5, -1.49, 0.5, 0.49, 3.5, 7.0] {
            let r = Rational::from_f64(v);
            assert_eq!(Scalar::round_int(&v), Scalar::round_int(&r));
            assert_eq!(Scalar::floor_int(&v), Scalar::floor_int(&r));
        }
    }
}
