//! Scalar backends.
//!
//! All linear algebra in this crate is generic over a complex scalar with two
//! concrete backends:
//!
//! * [`Exact`] — Gaussian rationals `Q(i)`, closed under the four field
//!   operations with no rounding. Dimension counts and existence decisions
//!   run on this backend so they cannot depend on tolerances.
//! * [`Float`] — `Complex<f64>` with an explicit comparison tolerance
//!   (default `1e-10`). The Yang-Mills solver runs here.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{Complex, One, Signed, Zero};

/// Comparison tolerance of the floating backend.
pub const FLOAT_TOL: f64 = 1e-10;

/// A complex scalar usable by the generic linear algebra.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True for backends with no rounding error.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn i_unit() -> Self;
    fn from_int(n: i64) -> Self;
    /// Build from rational real/imaginary parts (exactly representable in
    /// the exact backend, rounded in the floating one).
    fn from_rationals(re: BigRational, im: BigRational) -> Self;
    /// Build from an `f64` pair. The exact backend converts each part to the
    /// rational it denotes bit-exactly.
    fn from_c64(z: Complex64) -> Self;

    fn conjugate(&self) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn invert(&self) -> Option<Self>;
    /// Zero test: exact equality, or `|z| <= tol()` for the float backend.
    fn is_zero_val(&self) -> bool;
    /// Approximate magnitude, used only for pivot selection and reporting.
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> Complex64;

    /// Comparison tolerance (0 for the exact backend).
    fn tol() -> f64 {
        if Self::EXACT {
            0.0
        } else {
            FLOAT_TOL
        }
    }
}

/// Gaussian-rational scalar.
pub type Exact = Complex<BigRational>;

/// Double-precision complex scalar.
pub type Float = Complex64;

fn big_ratio(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }

    fn i_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn from_int(n: i64) -> Self {
        Complex::new(big_ratio(n), BigRational::zero())
    }

    fn from_rationals(re: BigRational, im: BigRational) -> Self {
        Complex::new(re, im)
    }

    fn from_c64(z: Complex64) -> Self {
        let part = |x: f64| BigRational::from_float(x).expect("finite float");
        Complex::new(part(z.re), part(z.im))
    }

    fn conjugate(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn invert(&self) -> Option<Self> {
        if self.is_zero_val() {
            None
        } else {
            Some(Self::one() / self.clone())
        }
    }

    fn is_zero_val(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_f64(&self.re), rational_f64(&self.im))
    }
}

impl Scalar for Float {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn i_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }

    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn from_rationals(re: BigRational, im: BigRational) -> Self {
        Complex64::new(rational_f64(&re), rational_f64(&im))
    }

    fn from_c64(z: Complex64) -> Self {
        z
    }

    fn conjugate(&self) -> Self {
        self.conj()
    }

    fn invert(&self) -> Option<Self> {
        if self.is_zero_val() {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }

    fn is_zero_val(&self) -> bool {
        self.norm() <= FLOAT_TOL
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Nearest `f64` to a rational.
pub fn rational_f64(x: &BigRational) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parse a rational written as `"a/b"` or `"a"` (decimal integers).
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let num: BigInt = a.trim().parse().ok()?;
            let den: BigInt = b.trim().parse().ok()?;
            if den.is_zero() {
                None
            } else {
                Some(BigRational::new(num, den))
            }
        }
        None => {
            let num: BigInt = s.parse().ok()?;
            Some(BigRational::from_integer(num))
        }
    }
}

/// Render a rational as `"a/b"` (or `"a"` when the denominator is 1).
pub fn rational_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact real part of an exact scalar, as a rational.
pub fn exact_re(z: &Exact) -> BigRational {
    z.re.clone()
}

/// |re| + |im| as a rational; exact "is this zero" witness for reports.
pub fn exact_l1(z: &Exact) -> BigRational {
    z.re.abs() + z.im.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_field_ops_close() {
        let a = Exact::from_rationals(
            parse_rational("1/3").unwrap(),
            parse_rational("-2/7").unwrap(),
        );
        let b = Exact::from_rationals(
            parse_rational("5/2").unwrap(),
            parse_rational("1/11").unwrap(),
        );
        let q = a.clone() / b.clone();
        assert_eq!(q * b, a);
    }

    #[test]
    fn from_c64_is_bit_exact() {
        let z = Complex64::new(0.1, -3.25);
        let e = Exact::from_c64(z);
        // 0.1 is not 1/10, but the conversion must reproduce the same f64.
        assert_eq!(e.to_c64(), z);
    }

    #[test]
    fn float_zero_tolerance() {
        assert!(Float::new(1e-12, -1e-12).is_zero_val());
        assert!(!Float::new(1e-9, 0.0).is_zero_val());
    }

    #[test]
    fn rational_round_trip() {
        for s in ["3", "-4/9", "22/7"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(rational_string(&r), s);
        }
        assert!(parse_rational("1/0").is_none());
    }
}
