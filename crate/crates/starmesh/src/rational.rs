//! Exact rational scalars and extended arrival values.
//!
//! All breakpoint and arrival computations run over arbitrary-precision
//! rationals so that step-by-step equality checks are bit-exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use std::cmp::Ordering;
use std::fmt;

/// Exact rational scalar. Always stored in lowest terms with a positive
/// denominator (maintained by `num_rational`).
pub type Rat = BigRational;

/// Builds a rational from an integer numerator and denominator.
///
/// Panics if `denom` is zero.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Builds a rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Formats a rational as `p/q`, or just `p` when the denominator is one.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `-p`, or `p/q` into a rational. The denominator must be a
/// positive integer.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    let bad = || RatParseError(s.to_string());
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rat::from_integer(n))
        }
        Some((ns, ds)) => {
            let n: BigInt = ns.parse().map_err(|_| bad())?;
            let d: BigInt = ds.parse().map_err(|_| bad())?;
            if !d.is_positive() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
    }
}

/// Error produced when a rational token cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational `{0}`")]
pub struct RatParseError(pub String);

/// An arrival time: either a finite instant or unreachable.
///
/// `Infinite` is absorbing under composition and neutral under minimum,
/// and compares greater than every finite time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arrival {
    Finite(Rat),
    Infinite,
}

impl Arrival {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Arrival::Infinite)
    }

    pub fn as_finite(&self) -> Option<&Rat> {
        match self {
            Arrival::Finite(r) => Some(r),
            Arrival::Infinite => None,
        }
    }

    /// Unwraps the finite value; panics on `Infinite`.
    pub fn expect_finite(self, msg: &str) -> Rat {
        match self {
            Arrival::Finite(r) => r,
            Arrival::Infinite => panic!("{msg}"),
        }
    }
}

impl PartialOrd for Arrival {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Arrival {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Arrival::Finite(a), Arrival::Finite(b)) => a.cmp(b),
            (Arrival::Finite(_), Arrival::Infinite) => Ordering::Less,
            (Arrival::Infinite, Arrival::Finite(_)) => Ordering::Greater,
            (Arrival::Infinite, Arrival::Infinite) => Ordering::Equal,
        }
    }
}

impl From<Rat> for Arrival {
    fn from(r: Rat) -> Self {
        Arrival::Finite(r)
    }
}

impl fmt::Display for Arrival {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arrival::Finite(r) => write!(f, "{}", fmt_rat(r)),
            Arrival::Infinite => write!(f, "inf"),
        }
    }
}

/// True when `r` is nonnegative.
pub fn is_nonnegative(r: &Rat) -> bool {
    !r.is_negative()
}

/// Returns the midpoint of two rationals.
pub fn midpoint(a: &Rat, b: &Rat) -> Rat {
    (a + b) / rat_int(2)
}
