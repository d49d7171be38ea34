//! Software floating point used where double cancellation is hopeless.
//!
//! A thin value type over `astro_float_num::BigFloat`. Binary operations
//! run at the larger of the two operand precisions.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float_num::{BigFloat, Consts, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache allocation"));
}

/// Arbitrary-precision real number.
#[derive(Clone)]
pub struct ExtReal {
    v: BigFloat,
    bits: usize,
}

impl ExtReal {
    fn wrap(v: BigFloat, bits: usize) -> Self {
        ExtReal { v, bits }
    }

    pub fn from_f64(x: f64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_f64(x, bits), bits)
    }

    pub fn from_i64(x: i64, bits: usize) -> Self {
        Self::wrap(BigFloat::from_i64(x, bits), bits)
    }

    pub fn zero(bits: usize) -> Self {
        Self::from_i64(0, bits)
    }

    pub fn one(bits: usize) -> Self {
        Self::from_i64(1, bits)
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Same value rounded (or padded) to a new precision.
    pub fn with_bits(&self, bits: usize) -> Self {
        let mut v = self.v.clone();
        // Only fails on NaN input, which never escapes this module.
        let _ = v.set_precision(bits, RM);
        Self::wrap(v, bits)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.v.is_nan() || self.v.is_inf())
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.bits)
    }

    pub fn recip(&self) -> Self {
        Self::wrap(self.v.reciprocal(self.bits, RM), self.bits)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.v.sqrt(self.bits, RM), self.bits)
    }

    pub fn ln(&self) -> Self {
        let v = CONSTS.with(|c| self.v.ln(self.bits, RM, &mut c.borrow_mut()));
        Self::wrap(v, self.bits)
    }

    /// Integer power, negative exponents included.
    pub fn powi(&self, n: i64) -> Self {
        let p = Self::wrap(
            self.v.powi(n.unsigned_abs() as usize, self.bits, RM),
            self.bits,
        );
        if n < 0 {
            p.recip()
        } else {
            p
        }
    }

    pub fn mul_f64(&self, x: f64) -> Self {
        self * &ExtReal::from_f64(x, self.bits)
    }

    /// Binary exponent `e` with `2^(e−1) ≤ |self| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        if self.v.is_zero() {
            None
        } else {
            self.v.exponent().map(i64::from)
        }
    }

    /// `log2 |self|` to about double accuracy; −∞ for zero.
    pub fn log2_abs(&self) -> f64 {
        match self.v.as_raw_parts() {
            Some((m, _, _, e, _)) if !self.v.is_zero() => {
                let top = *m.last().unwrap_or(&0);
                (top as f64 / 18446744073709551616.0).log2() + e as f64
            }
            _ => f64::NEG_INFINITY,
        }
    }

    /// Nearest double (overflow gives ±∞, deep underflow gives ±0).
    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf() {
            return if self.v.is_inf_pos() {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
        }
        let Some((m, _, sign, e, _)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        if self.v.is_zero() || m.is_empty() {
            return 0.0;
        }
        let top = m[m.len() - 1];
        let next = if m.len() > 1 { m[m.len() - 2] } else { 0 };
        // 0.m × 2^e with the top word normalised; 64 extra bits keep the
        // double rounding error far below half an ulp in practice.
        let mant = (top as f64) + (next as f64) / 18446744073709551616.0;
        let v = ldexp(mant, e as i64 - 64);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    pub fn cmp_abs(&self, other: &ExtReal) -> Ordering {
        match self.v.abs_cmp(&other.v) {
            Some(c) if c < 0 => Ordering::Less,
            Some(c) if c > 0 => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }
}

/// `x · 2^e` without intermediate overflow.
pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    let big = 2f64.powi(1000);
    let small = 2f64.powi(-1000);
    while e > 1000 {
        x *= big;
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= small;
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.v.cmp(&other.v) == Some(0)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $call:ident) => {
        impl<'a> $tr<&'a ExtReal> for &'a ExtReal {
            type Output = ExtReal;
            fn $method(self, rhs: &'a ExtReal) -> ExtReal {
                let bits = self.bits.max(rhs.bits);
                ExtReal::wrap(self.v.$call(&rhs.v, bits, RM), bits)
            }
        }
        impl $tr<ExtReal> for ExtReal {
            type Output = ExtReal;
            fn $method(self, rhs: ExtReal) -> ExtReal {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a ExtReal> for ExtReal {
            type Output = ExtReal;
            fn $method(self, rhs: &'a ExtReal) -> ExtReal {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        ExtReal::wrap(BigFloat::neg(&self.v), self.bits)
    }
}

impl Neg for &ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        ExtReal::wrap(BigFloat::neg(&self.v), self.bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_doubles() {
        for &x in &[
            1.0,
            -3.5,
            1e-300,
            7.25e300,
            0.1,
            -2.2250738585072014e-308,
            0.0,
        ] {
            assert_eq!(ExtReal::from_f64(x, 200).to_f64(), x);
        }
    }

    #[test]
    fn deep_values_saturate() {
        let tiny = ExtReal::from_f64(1e-200, 128).powi(3);
        assert_eq!(tiny.to_f64(), 0.0);
        assert!((tiny.log2_abs() - (-600.0 * 10f64.log2())).abs() < 1e-6);
        let huge = ExtReal::from_f64(1e200, 128).powi(3);
        assert!(huge.to_f64().is_infinite());
    }

    #[test]
    fn third_is_accurate() {
        let t = ExtReal::one(300) / ExtReal::from_i64(3, 300);
        let back = &t * &ExtReal::from_i64(3, 300) - ExtReal::one(300);
        assert!(back.is_zero() || back.log2_abs() < -290.0);
        assert_eq!(t.to_f64(), 1.0 / 3.0);
    }

    #[test]
    fn ln_matches_double() {
        let x = ExtReal::from_f64(0.37, 256);
        assert!((x.ln().to_f64() - 0.37f64.ln()).abs() < 1e-16);
    }
}
