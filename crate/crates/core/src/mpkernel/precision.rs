use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working-precision real number.
pub type Real = Float;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Number of significant decimal digits carried by every real in a run.
///
/// All values created through one context share the same binary precision,
/// so a computation repeated with the same context and inputs is
/// bit-identical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    digits: u32,
}

impl PrecisionContext {
    pub const MIN_DIGITS: u32 = 16;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::PrecisionTooLow(digits));
        }
        Ok(Self { digits })
    }

    /// Default rule for internuclear distance `r`: `max(64, ceil(r/2) + 40)`.
    ///
    /// Cross-center quantities scale like `e^-R`, i.e. about `0.434 R`
    /// decimal digits below the one-center ones.
    pub fn for_distance(r: f64) -> Self {
        let digits = ((0.5 * r).ceil().max(0.0) as u32 + 40).max(64);
        Self { digits }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Mantissa bits corresponding to `digits`.
    pub fn bits(&self) -> u32 {
        (self.digits as f64 * LOG2_10).ceil() as u32
    }

    pub fn zero(&self) -> Real {
        Float::new(self.bits())
    }

    pub fn one(&self) -> Real {
        Float::with_val(self.bits(), 1)
    }

    pub fn int(&self, v: i64) -> Real {
        Float::with_val(self.bits(), v)
    }

    pub fn f64(&self, v: f64) -> Real {
        Float::with_val(self.bits(), v)
    }

    /// `p / q`, correctly rounded.
    pub fn ratio(&self, p: i64, q: i64) -> Real {
        let mut x = self.int(p);
        x /= q;
        x
    }

    /// Parses a decimal literal at working precision (exact up to rounding).
    pub fn parse(&self, s: &str) -> Result<Real> {
        let parsed = Float::parse(s.trim()).map_err(|e| Error::Invalid(format!("{s:?}: {e}")))?;
        Ok(Float::with_val(self.bits(), parsed))
    }

    pub fn pi(&self) -> Real {
        Float::with_val(self.bits(), Constant::Pi)
    }

    pub fn exp(&self, x: &Real) -> Real {
        Float::with_val(self.bits(), x.exp_ref())
    }

    pub fn sqrt(&self, x: &Real) -> Real {
        Float::with_val(self.bits(), x.sqrt_ref())
    }

    /// `n!` rounded to working precision.
    pub fn factorial(&self, n: u32) -> Real {
        Float::with_val(self.bits(), Float::factorial(n))
    }

    /// Binomial coefficient `C(n, k)`; zero outside `0 <= k <= n`.
    pub fn binomial(&self, n: u32, k: u32) -> Real {
        if k > n {
            return self.zero();
        }
        let mut c = self.one();
        let k = k.min(n - k);
        for i in 0..k {
            c *= n - i;
            c /= i + 1;
        }
        c
    }

    pub fn powi(&self, x: &Real, n: i32) -> Real {
        Float::with_val(self.bits(), x.pow(n))
    }

    /// `10^(-digits + shift)`, the scale used for precision-relative tolerances.
    pub fn tolerance(&self, shift: i32) -> Real {
        let ten = self.int(10);
        let e = shift - self.digits as i32;
        Float::with_val(self.bits(), ten.pow(e))
    }

    pub fn from_ref(&self, x: &Real) -> Real {
        Float::with_val(self.bits(), x)
    }
}

/// Formats `x` in decimal scientific notation with `digits` significant
/// digits and a one-digit integer part, e.g. `-2.749901240e-42`.
pub fn to_scientific(x: &Real, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // value = 0.d1d2... * 10^exp
    let (neg, mantissa, exp) = x.to_sign_string_exp(10, Some(digits.max(1) as usize));
    let exp = exp.expect("finite nonzero") - 1;
    let (head, tail) = mantissa.split_at(1);
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}

/// Fixed-width floor of `log10(|x|)`, used for diagnostics only.
pub fn log10_abs(x: &Real) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log10() + e as f64 * std::f64::consts::LOG10_2
}
