//! Scalar abstraction shared by kernels and quivers.
//!
//! Exact models use [`Rational`]; grid models use `f64` (or `f32`) with an
//! absolute tolerance for every equality and positivity test.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational.
pub type Rational = BigRational;

/// Tolerance used by `f64` models for equality and positivity.
pub const F64_TOLERANCE: f64 = 1e-9;
/// Tolerance used by `f32` models.
pub const F32_TOLERANCE: f32 = 1e-5;

/// Number type a kernel or quiver can be built over.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// `true` when the scalar is exact (zero tolerance).
    const EXACT: bool;

    /// Absolute tolerance; zero for exact types.
    fn tolerance() -> Self;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Short human-readable text, used for vertex labels of grid points.
    fn label(&self) -> String;

    /// Index of the nearest integer, ties toward the lower one.
    fn round_half_down(&self) -> i64;

    fn from_usize(n: usize) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    fn is_positive_tol(&self) -> bool {
        *self > Self::tolerance()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn tolerance() -> Self {
        Rational::zero()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn label(&self) -> String {
        self.to_string()
    }

    fn round_half_down(&self) -> i64 {
        let floor = self.floor();
        let frac = self - &floor;
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        let k = floor.to_integer().to_i64().unwrap_or(i64::MAX);
        if frac > half {
            k + 1
        } else {
            k
        }
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn tolerance() -> Self {
                $tol
            }

            fn from_rational(r: &Rational) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn label(&self) -> String {
                format_float_label(*self as f64)
            }

            fn round_half_down(&self) -> i64 {
                let floor = self.floor();
                let frac = *self - floor;
                if frac > 0.5 + $tol {
                    floor as i64 + 1
                } else {
                    floor as i64
                }
            }
        }
    };
}

float_scalar!(f64, F64_TOLERANCE);
float_scalar!(f32, F32_TOLERANCE);

fn format_float_label(x: f64) -> String {
    let s = format!("{:.9}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "-0" | "" => "0".to_string(),
        other => other.to_string(),
    }
}

/// Parse `"p/q"`, a decimal such as `"0.25"` / `"-1.5e-3"`, or an integer, exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
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
    let all: BigInt = format!("{}{}", int_part, frac_part).parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Some(value)
}

/// Shorthand for `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Format with `sig` significant digits, trailing zeros trimmed.
pub fn format_significant(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
