//! Arithmetic precision modes.
//!
//! Hankel and connecting matrices are exponentially ill-conditioned, so the
//! exact-data parts of the toolkit (the Chebyshev transform, Hankel assembly,
//! response/moment conversion and the LDLᵀ factorization) are generic over
//! [`Scalar`]. Three backends are provided:
//!
//! - `f64` for [`PrecisionMode::Double`],
//! - [`TwoFloat`] (double-double, about 106 significant bits) for
//!   [`PrecisionMode::Extended`],
//! - [`BigRational`] for [`PrecisionMode::Rational`]. Every finite `f64` is a
//!   dyadic rational, so rational mode accepts any finite double input and
//!   is exact from there on.
//!
//! Eigenvalue routines always run in `f64`.

use std::fmt::{self, Debug};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Num, ToPrimitive};
use serde::{Deserialize, Serialize};

pub use num_rational::BigRational;
pub use twofloat::TwoFloat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    #[default]
    Double,
    Extended,
    Rational,
}

impl PrecisionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PrecisionMode::Double => "double",
            PrecisionMode::Extended => "extended",
            PrecisionMode::Rational => "rational",
        }
    }
}

impl fmt::Display for PrecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrecisionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "double" => Ok(PrecisionMode::Double),
            "extended" => Ok(PrecisionMode::Extended),
            "rational" => Ok(PrecisionMode::Rational),
            other => Err(format!("unknown precision mode `{other}`")),
        }
    }
}

/// A real field usable by the precision-generic routines.
pub trait Scalar:
    Num + Clone + Debug + PartialOrd + std::ops::Neg<Output = Self> + Send + Sync + 'static
{
    const MODE: PrecisionMode;

    /// Converts a double; exact for every backend.
    fn from_f64(x: f64) -> Self;

    /// Converts a big integer, rounding only when the backend cannot hold it.
    fn from_bigint(x: &BigInt) -> Self;

    fn to_f64(&self) -> f64;

    /// `sqrt(self)` rounded to double, computed in the backend's precision
    /// where a square root exists.
    fn sqrt_f64(&self) -> f64;

    /// Relative size of a pivot below which a factorization in this
    /// precision is no longer trusted. `0.0` means only exact breakdown
    /// counts.
    fn pivot_guard() -> f64;

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Scalar for f64 {
    const MODE: PrecisionMode = PrecisionMode::Double;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn from_bigint(x: &BigInt) -> Self {
        x.to_f64().unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_f64(&self) -> f64 {
        self.sqrt()
    }

    fn pivot_guard() -> f64 {
        1e-10
    }
}

impl Scalar for TwoFloat {
    const MODE: PrecisionMode = PrecisionMode::Extended;

    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }

    fn from_bigint(x: &BigInt) -> Self {
        let hi = x.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() {
            return TwoFloat::from(hi);
        }
        let rest = x - BigInt::from_f64_exact(hi);
        TwoFloat::new_add(hi, rest.to_f64().unwrap_or(0.0))
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn sqrt_f64(&self) -> f64 {
        f64::from(self.sqrt())
    }

    fn pivot_guard() -> f64 {
        1e-24
    }
}

impl Scalar for BigRational {
    const MODE: PrecisionMode = PrecisionMode::Rational;

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("rational mode requires finite inputs")
    }

    fn from_bigint(x: &BigInt) -> Self {
        BigRational::from_integer(x.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt_f64(&self) -> f64 {
        Scalar::to_f64(self).sqrt()
    }

    fn pivot_guard() -> f64 {
        0.0
    }
}

trait FromF64Exact {
    fn from_f64_exact(x: f64) -> Self;
}

impl FromF64Exact for BigInt {
    fn from_f64_exact(x: f64) -> Self {
        // `x` is integral here: it came from rounding a BigInt.
        num_traits::FromPrimitive::from_f64(x).unwrap_or_default()
    }
}

/// Runs `$body` with the type alias `$S` bound to the backend for `$mode`.
#[macro_export]
macro_rules! with_precision {
    ($mode:expr, $S:ident => $body:expr) => {
        match $mode {
            $crate::PrecisionMode::Double => {
                #[allow(dead_code)]
                type $S = f64;
                $body
            }
            $crate::PrecisionMode::Extended => {
                #[allow(dead_code)]
                type $S = $crate::scalar::TwoFloat;
                $body
            }
            $crate::PrecisionMode::Rational => {
                #[allow(dead_code)]
                type $S = $crate::scalar::BigRational;
                $body
            }
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_mode_parses_case_insensitively() {
        assert_eq!("Double".parse::<PrecisionMode>(), Ok(PrecisionMode::Double));
        assert_eq!("extended".parse::<PrecisionMode>(), Ok(PrecisionMode::Extended));
        assert_eq!("RATIONAL".parse::<PrecisionMode>(), Ok(PrecisionMode::Rational));
        assert!("quad".parse::<PrecisionMode>().is_err());
    }

    #[test]
    fn rational_from_f64_is_exact() {
        let x = 0.1_f64;
        let q = <BigRational as Scalar>::from_f64(x);
        assert_eq!(Scalar::to_f64(&q), x);
        assert_ne!(q, BigRational::new(1.into(), 10.into()));
    }

    #[test]
    fn extended_bigint_keeps_low_bits() {
        let big = BigInt::from(1u64 << 60) + BigInt::from(1);
        let t = <TwoFloat as Scalar>::from_bigint(&big);
        let back = t - TwoFloat::from((1u64 << 60) as f64);
        assert_eq!(f64::from(back), 1.0);
    }

    #[test]
    fn sqrt_agrees_across_backends() {
        let two = 2.0_f64;
        assert_eq!(two.sqrt_f64(), std::f64::consts::SQRT_2);
        assert!((<TwoFloat as Scalar>::from_f64(2.0).sqrt_f64() - std::f64::consts::SQRT_2).abs() < 1e-16);
        assert!((<BigRational as Scalar>::from_f64(2.0).sqrt_f64() - std::f64::consts::SQRT_2).abs() < 1e-16);
    }
}
