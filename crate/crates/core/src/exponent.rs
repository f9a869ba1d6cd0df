//! Integrability exponents that may be infinite.
//!
//! The second indices of Besov and Lorentz norms range over `[1, ∞]`. Infinity
//! is kept as its own variant so that reciprocal arithmetic (`1/∞ = 0`) stays
//! exact instead of going through a large float.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// Builds an exponent from its reciprocal; `0` maps to infinity.
    pub fn from_recip(recip: f64) -> Self {
        if recip == 0.0 {
            Exponent::Infinite
        } else {
            Exponent::Finite(1.0 / recip)
        }
    }

    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(v) => 1.0 / v,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    /// The value as a float, with `f64::INFINITY` for the infinite variant.
    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(v) => v,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// Checks membership in `[lo, ∞]`.
    pub fn check_at_least(self, lo: f64, name: &str) -> Result<Self> {
        match self {
            Exponent::Finite(v) if !(v >= lo) || !v.is_finite() => Err(Error::pre(format!(
                "{name} = {v} must lie in [{lo}, inf]"
            ))),
            _ => Ok(self),
        }
    }
}

impl From<f64> for Exponent {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Exponent::Infinite
        } else {
            Exponent::Finite(v)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::Infinite);
        }
        s.parse::<f64>()
            .map(Exponent::from)
            .map_err(|_| Error::Format(format!("cannot parse exponent `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_round_trip() {
        assert_eq!(Exponent::Infinite.recip(), 0.0);
        assert_eq!(Exponent::from_recip(0.0), Exponent::Infinite);
        assert_eq!(Exponent::from_recip(0.25), Exponent::Finite(4.0));
    }

    #[test]
    fn parses_inf() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinite);
        assert_eq!(" 2.5 ".parse::<Exponent>().unwrap(), Exponent::Finite(2.5));
        assert!("two".parse::<Exponent>().is_err());
    }

    #[test]
    fn range_check() {
        assert!(Exponent::Finite(0.5).check_at_least(1.0, "theta").is_err());
        assert!(Exponent::Infinite.check_at_least(1.0, "theta").is_ok());
    }
}
