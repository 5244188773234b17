//! Extended-precision real and complex scalars.
//!
//! [`XReal`] wraps an MPFR float. Binary operations round to the larger of
//! the two operand precisions, so mixing values of different precision never
//! silently loses digits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LOG2_10: f64 = std::f64::consts::LOG2_10;
const GUARD_BITS: u32 = 8;

/// Working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Precision(u32);

impl Precision {
    pub const MIN_DIGITS: u32 = 15;
    pub const DEFAULT_DIGITS: u32 = 60;
    pub const DEFAULT: Precision = Precision(Self::DEFAULT_DIGITS);

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::InvalidPrecision(digits));
        }
        Ok(Precision(digits))
    }

    pub fn digits(self) -> u32 {
        self.0
    }

    /// Mantissa bits used for this many decimal digits (plus guard bits).
    pub fn bits(self) -> u32 {
        (self.0 as f64 * LOG2_10).ceil() as u32 + GUARD_BITS
    }

    fn from_bits(bits: u32) -> Self {
        let digits = ((bits.saturating_sub(GUARD_BITS)) as f64 / LOG2_10).floor() as u32;
        Precision(digits.max(Self::MIN_DIGITS))
    }

    /// `10^-(digits - slack)`, the customary "agree to within" threshold.
    pub fn tolerance(self, slack: u32) -> XReal {
        let exp = self.0.saturating_sub(slack) as i32;
        XReal::from_i32(10, self).powi(-exp)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<u32> for Precision {
    type Error = Error;
    fn try_from(d: u32) -> Result<Self> {
        Precision::new(d)
    }
}

impl From<Precision> for u32 {
    fn from(p: Precision) -> u32 {
        p.0
    }
}

/// Extended-precision real number.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct XReal(Float);

impl XReal {
    pub fn from_float(f: Float) -> Self {
        XReal(f)
    }

    pub fn zero(prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), 0))
    }

    pub fn one(prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), 1))
    }

    pub fn from_f64(v: f64, prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), v))
    }

    pub fn from_i32(v: i32, prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), v))
    }

    pub fn from_usize(v: usize, prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), v as u64))
    }

    /// `num / den`, correctly rounded.
    pub fn ratio(num: i64, den: i64, prec: Precision) -> Self {
        let n = Float::with_val(prec.bits(), num);
        XReal(Float::with_val(prec.bits(), n / den))
    }

    /// Parses a decimal literal such as `"8.12192"` or `"1.84357e-6"`.
    pub fn parse(s: &str, prec: Precision) -> Result<Self> {
        let parsed = Float::parse(s.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        Ok(XReal(Float::with_val(prec.bits(), parsed)))
    }

    pub fn pi(prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), Constant::Pi))
    }

    pub fn ln2(prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), Constant::Log2))
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn prec_bits(&self) -> u32 {
        self.0.prec()
    }

    pub fn precision(&self) -> Precision {
        Precision::from_bits(self.0.prec())
    }

    /// Same value re-rounded to `prec`.
    pub fn with_precision(&self, prec: Precision) -> Self {
        XReal(Float::with_val(prec.bits(), &self.0))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        XReal(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Self {
        XReal(self.0.clone().sqrt())
    }

    pub fn exp(&self) -> Self {
        XReal(self.0.clone().exp())
    }

    pub fn ln(&self) -> Self {
        XReal(self.0.clone().ln())
    }

    pub fn log10(&self) -> Self {
        XReal(self.0.clone().log10())
    }

    pub fn cos(&self) -> Self {
        XReal(self.0.clone().cos())
    }

    pub fn sin(&self) -> Self {
        XReal(self.0.clone().sin())
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let (s, c) = self.0.clone().sin_cos(Float::new(self.0.prec()));
        (XReal(s), XReal(c))
    }

    pub fn cosh(&self) -> Self {
        XReal(self.0.clone().cosh())
    }

    pub fn sinh(&self) -> Self {
        XReal(self.0.clone().sinh())
    }

    pub fn acosh(&self) -> Self {
        XReal(self.0.clone().acosh())
    }

    pub fn recip(&self) -> Self {
        XReal(self.0.clone().recip())
    }

    pub fn square(&self) -> Self {
        XReal(self.0.clone().square())
    }

    pub fn powi(&self, n: i32) -> Self {
        XReal(self.0.clone().pow(n))
    }

    pub fn powf(&self, e: &XReal) -> Self {
        let p = self.0.prec().max(e.0.prec());
        XReal(Float::with_val(p, (&self.0).pow(&e.0)))
    }

    pub fn max_of(a: &XReal, b: &XReal) -> XReal {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Total order for sorting; NaN sorts last.
    pub fn total_cmp(&self, other: &XReal) -> Ordering {
        self.0.partial_cmp(&other.0).unwrap_or_else(|| {
            self.0.is_nan().cmp(&other.0.is_nan())
        })
    }

    /// Shortest decimal string that parses back to the identical value at
    /// this precision.
    pub fn to_decimal_string(&self) -> String {
        self.0.to_string_radix(10, None)
    }

    /// Human-oriented rendering with `sig` significant digits.
    pub fn to_sig_string(&self, sig: usize) -> String {
        fmt_sig(self.to_f64(), sig)
    }
}

/// Formats like Mathematica's default numeric output: plain for moderate
/// magnitudes, `a×10^k` style (`ae k`) otherwise.
pub fn fmt_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-5..6).contains(&mag) {
        let decimals = (sig as i32 - 1 - mag).max(0) as usize;
        let s = format!("{v:.decimals$}");
        trim_zeros(&s)
    } else {
        let s = format!("{:.*e}", sig.saturating_sub(1), v);
        match s.split_once('e') {
            Some((m, e)) => format!("{}e{}", trim_zeros(m), e),
            None => s,
        }
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

impl fmt::Debug for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_string_radix(10, Some(25)))
    }
}

impl fmt::Display for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(sig) => write!(f, "{}", self.to_sig_string(sig)),
            None => write!(f, "{}", self.to_decimal_string()),
        }
    }
}

impl Serialize for XReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal_string())
    }
}

macro_rules! real_binop {
    ($Trait:ident, $method:ident, $Assign:ident, $assign:ident) => {
        impl<'a, 'b> $Trait<&'b XReal> for &'a XReal {
            type Output = XReal;
            fn $method(self, rhs: &'b XReal) -> XReal {
                let p = self.0.prec().max(rhs.0.prec());
                XReal(Float::with_val(p, $Trait::$method(&self.0, &rhs.0)))
            }
        }
        impl $Trait<XReal> for XReal {
            type Output = XReal;
            fn $method(self, rhs: XReal) -> XReal {
                $Trait::$method(&self, &rhs)
            }
        }
        impl<'b> $Trait<&'b XReal> for XReal {
            type Output = XReal;
            fn $method(self, rhs: &'b XReal) -> XReal {
                $Trait::$method(&self, rhs)
            }
        }
        impl<'a> $Trait<XReal> for &'a XReal {
            type Output = XReal;
            fn $method(self, rhs: XReal) -> XReal {
                $Trait::$method(self, &rhs)
            }
        }
        impl<'b> $Assign<&'b XReal> for XReal {
            fn $assign(&mut self, rhs: &'b XReal) {
                *self = $Trait::$method(&*self, rhs);
            }
        }
        impl $Assign<XReal> for XReal {
            fn $assign(&mut self, rhs: XReal) {
                *self = $Trait::$method(&*self, &rhs);
            }
        }
        impl<'a> $Trait<i32> for &'a XReal {
            type Output = XReal;
            fn $method(self, rhs: i32) -> XReal {
                XReal(Float::with_val(self.0.prec(), $Trait::$method(&self.0, rhs)))
            }
        }
        impl $Trait<i32> for XReal {
            type Output = XReal;
            fn $method(self, rhs: i32) -> XReal {
                $Trait::$method(&self, rhs)
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign);
real_binop!(Sub, sub, SubAssign, sub_assign);
real_binop!(Mul, mul, MulAssign, mul_assign);
real_binop!(Div, div, DivAssign, div_assign);

impl Neg for XReal {
    type Output = XReal;
    fn neg(self) -> XReal {
        XReal(-self.0)
    }
}

impl<'a> Neg for &'a XReal {
    type Output = XReal;
    fn neg(self) -> XReal {
        XReal(-self.0.clone())
    }
}

/// Extended-precision complex number as a pair of [`XReal`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XComplex {
    pub re: XReal,
    pub im: XReal,
}

impl XComplex {
    pub fn new(re: XReal, im: XReal) -> Self {
        XComplex { re, im }
    }

    pub fn zero(prec: Precision) -> Self {
        XComplex::new(XReal::zero(prec), XReal::zero(prec))
    }

    pub fn from_real(re: XReal) -> Self {
        let im = XReal(Float::with_val(re.0.prec(), 0));
        XComplex { re, im }
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        XComplex::new(XReal::from_f64(re, prec), XReal::from_f64(im, prec))
    }

    pub fn conj(&self) -> Self {
        XComplex::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> XReal {
        self.re.square() + self.im.square()
    }

    pub fn abs(&self) -> XReal {
        let p = self.re.0.prec().max(self.im.0.prec());
        XReal(Float::with_val(p, self.re.0.hypot_ref(&self.im.0)))
    }

    pub fn scale(&self, k: &XReal) -> Self {
        XComplex::new(&self.re * k, &self.im * k)
    }

    /// `e^{i theta}` for real `theta`.
    pub fn cis(theta: &XReal) -> Self {
        let (s, c) = theta.sin_cos();
        XComplex::new(c, s)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl<'a, 'b> Add<&'b XComplex> for &'a XComplex {
    type Output = XComplex;
    fn add(self, rhs: &'b XComplex) -> XComplex {
        XComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a, 'b> Sub<&'b XComplex> for &'a XComplex {
    type Output = XComplex;
    fn sub(self, rhs: &'b XComplex) -> XComplex {
        XComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a, 'b> Mul<&'b XComplex> for &'a XComplex {
    type Output = XComplex;
    fn mul(self, rhs: &'b XComplex) -> XComplex {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        XComplex::new(re, im)
    }
}

impl<'a, 'b> Div<&'b XComplex> for &'a XComplex {
    type Output = XComplex;
    fn div(self, rhs: &'b XComplex) -> XComplex {
        let den = rhs.norm_sqr();
        let re = (&self.re * &rhs.re + &self.im * &rhs.im) / &den;
        let im = (&self.im * &rhs.re - &self.re * &rhs.im) / &den;
        XComplex::new(re, im)
    }
}

impl<'a> Neg for &'a XComplex {
    type Output = XComplex;
    fn neg(self) -> XComplex {
        XComplex::new(-&self.re, -&self.im)
    }
}

macro_rules! complex_owned {
    ($Trait:ident, $method:ident) => {
        impl $Trait<XComplex> for XComplex {
            type Output = XComplex;
            fn $method(self, rhs: XComplex) -> XComplex {
                $Trait::$method(&self, &rhs)
            }
        }
        impl<'b> $Trait<&'b XComplex> for XComplex {
            type Output = XComplex;
            fn $method(self, rhs: &'b XComplex) -> XComplex {
                $Trait::$method(&self, rhs)
            }
        }
    };
}

complex_owned!(Add, add);
complex_owned!(Sub, sub);
complex_owned!(Mul, mul);
complex_owned!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_floor() {
        assert!(Precision::new(14).is_err());
        assert_eq!(Precision::new(15).unwrap().digits(), 15);
        assert!(Precision::DEFAULT.bits() >= 200);
    }

    #[test]
    fn mixed_precision_uses_max() {
        let lo = XReal::one(Precision::new(20).unwrap());
        let hi = XReal::pi(Precision::new(80).unwrap());
        let s = &lo + &hi;
        assert_eq!(s.prec_bits(), hi.prec_bits());
        let s2 = &hi + &lo;
        assert_eq!(s2.prec_bits(), hi.prec_bits());
    }

    #[test]
    fn decimal_string_round_trips() {
        let p = Precision::DEFAULT;
        let x = XReal::pi(p) / XReal::from_i32(7, p);
        let back = XReal::parse(&x.to_decimal_string(), p).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn complex_division_inverts_multiplication() {
        let p = Precision::DEFAULT;
        let a = XComplex::from_f64(1.5, -2.0, p);
        let b = XComplex::from_f64(-0.25, 3.0, p);
        let q = &(&a * &b) / &b;
        let err = (&q - &a).abs();
        assert!(err < p.tolerance(3));
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(8.121921, 6), "8.12192");
        assert_eq!(fmt_sig(-3.75, 6), "-3.75");
        assert_eq!(fmt_sig(1.84357e-6, 6), "1.84357e-6");
        assert_eq!(fmt_sig(1.36908e21, 6), "1.36908e21");
    }
}
