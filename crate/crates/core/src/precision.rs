//! Working precision and the small amount of complex arithmetic the zeta
//! and zero-sum code needs on top of `rug::Float`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use rug::ops::PowAssign;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Decimal working precision shared by every high-precision routine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    digits: u32,
}

impl PrecisionContext {
    pub const DEFAULT_DIGITS: u32 = 50;
    pub const MIN_DIGITS: u32 = 15;

    const GUARD_BITS: u32 = 16;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::InvalidArgument(format!(
                "precision must be at least {} digits, got {digits}",
                Self::MIN_DIGITS
            )));
        }
        Ok(Self { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision including guard bits.
    pub fn bits(&self) -> u32 {
        (f64::from(self.digits) * std::f64::consts::LOG2_10).ceil() as u32 + Self::GUARD_BITS
    }

    pub fn float<T>(&self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    pub fn rational(&self, value: &Rational) -> Float {
        Float::with_val(self.bits(), value)
    }

    /// `10^-k` at this precision.
    pub fn ten_pow_neg(&self, k: i32) -> Float {
        let mut t = self.float(10);
        t.pow_assign(-k);
        t
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            digits: Self::DEFAULT_DIGITS,
        }
    }
}

/// Complex number with `rug::Float` parts of equal precision.
#[derive(Debug, Clone, PartialEq)]
pub struct HpComplex {
    pub re: Float,
    pub im: Float,
}

impl HpComplex {
    pub fn new(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Self::new(Float::new(prec), Float::new(prec))
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Self { re, im }
    }

    /// `mag * (cos angle + i sin angle)`.
    pub fn from_polar(mag: &Float, angle: &Float) -> Self {
        let (s, c) = angle.clone().sin_cos(Float::new(angle.prec()));
        Self::new(c * mag, s * mag)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> Float {
        Float::with_val(self.prec(), self.re.square_ref()) + Float::with_val(self.prec(), self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn scale(&self, k: &Float) -> Self {
        Self::new(Float::with_val(self.prec(), &self.re * k), Float::with_val(self.prec(), &self.im * k))
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        Self::new(Float::with_val(self.prec(), &self.re / &n), -Float::with_val(self.prec(), &self.im / &n))
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        self.re += &other.re;
        self.im += &other.im;
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl Add<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn add(self, rhs: &HpComplex) -> HpComplex {
        let p = self.prec();
        HpComplex::new(Float::with_val(p, &self.re + &rhs.re), Float::with_val(p, &self.im + &rhs.im))
    }
}

impl Sub<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn sub(self, rhs: &HpComplex) -> HpComplex {
        let p = self.prec();
        HpComplex::new(Float::with_val(p, &self.re - &rhs.re), Float::with_val(p, &self.im - &rhs.im))
    }
}

impl Mul<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn mul(self, rhs: &HpComplex) -> HpComplex {
        let p = self.prec();
        let re = Float::with_val(p, &self.re * &rhs.re) - Float::with_val(p, &self.im * &rhs.im);
        let im = Float::with_val(p, &self.re * &rhs.im) + Float::with_val(p, &self.im * &rhs.re);
        HpComplex::new(re, im)
    }
}

impl Div<&HpComplex> for &HpComplex {
    type Output = HpComplex;
    fn div(self, rhs: &HpComplex) -> HpComplex {
        self * &rhs.recip()
    }
}

impl Neg for HpComplex {
    type Output = HpComplex;
    fn neg(self) -> HpComplex {
        HpComplex::new(-self.re, -self.im)
    }
}

impl fmt::Display for HpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im.is_sign_negative() { '-' } else { '+' };
        write!(f, "{} {} {}i", self.re, sign, Float::with_val(self.prec(), self.im.abs_ref()))
    }
}

/// Parses `p/q`, an integer, or an exact decimal literal such as `1000.5`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::BadRational(text.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = t.split_once('/') {
        let n = Integer::from_str(num.trim()).map_err(|_| bad())?;
        let d = Integer::from_str(den.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::from((n, d)));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac_part);
        let n = Integer::from_str(&digits).map_err(|_| bad())?;
        let d = Integer::from(Integer::u_pow_u(10, frac_part.len() as u32));
        let q = Rational::from((n, d));
        return Ok(if negative { -q } else { q });
    }
    Integer::from_str(t).map(Rational::from).map_err(|_| bad())
}

/// `floor(x)` for nonnegative rationals that fit in a `u64`.
pub fn floor_u64(x: &Rational) -> Result<u64> {
    let f = x.clone().floor();
    f.numer()
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument(format!("floor of {x} does not fit in u64")))
}

/// True when `x = [x] + 1/2`.
pub fn is_half_integer(x: &Rational) -> bool {
    *x.denom() == 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("5/2").unwrap(), Rational::from((5, 2)));
        assert_eq!(parse_rational("2").unwrap(), Rational::from(2));
        assert_eq!(parse_rational("1000.5").unwrap(), Rational::from((2001, 2)));
        assert_eq!(parse_rational("-0.25").unwrap(), Rational::from((-1, 4)));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn precision_floor() {
        assert!(PrecisionContext::new(14).is_err());
        assert!(PrecisionContext::new(15).unwrap().bits() >= 50);
    }

    #[test]
    fn complex_division_roundtrip() {
        let p = 128;
        let a = HpComplex::new(Float::with_val(p, 3), Float::with_val(p, -4));
        let b = HpComplex::new(Float::with_val(p, 0.5), Float::with_val(p, 2));
        let back = &(&a / &b) * &b;
        let err = (&back - &a).abs();
        assert!(err < 1e-30);
        assert_eq!(a.abs(), 5);
    }

    #[test]
    fn half_integers() {
        assert!(is_half_integer(&Rational::from((201, 2))));
        assert!(!is_half_integer(&Rational::from(100)));
        assert_eq!(floor_u64(&Rational::from((201, 2))).unwrap(), 100);
    }
}
