//! Exact numeric helpers shared by every module.
//!
//! Naturals are arbitrary precision and rationals are reduced big-integer
//! fractions. On the command line and in files rationals are written as
//! `"p/q"` (or a bare integer); decimals are rejected.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Nat = BigUint;
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("invalid rational {0:?}: expected \"p/q\" or an integer")]
    BadRational(String),
    #[error("invalid rational {0:?}: zero denominator")]
    ZeroDenominator(String),
}

pub fn parse_rational(text: &str) -> Result<Rational, NumError> {
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let valid = |s: &str, signed: bool| {
        let digits = if signed { s.strip_prefix('-').unwrap_or(s) } else { s };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num, true) || !valid(den, false) {
        return Err(NumError::BadRational(text.to_string()));
    }
    let n: BigInt = num.parse().map_err(|_| NumError::BadRational(text.to_string()))?;
    let d: BigInt = den.parse().map_err(|_| NumError::BadRational(text.to_string()))?;
    if d.is_zero() {
        return Err(NumError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::new(n, d))
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn nat(n: u64) -> Nat {
    Nat::from(n)
}

pub fn nat_to_rational(n: &Nat) -> Rational {
    Rational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

/// Ceiling of a nonnegative rational as a natural.
pub fn ceil_nat(r: &Rational) -> Nat {
    assert!(!r.is_negative(), "ceil_nat of negative rational");
    let (q, rem) = r.numer().div_rem(r.denom());
    let q = q.to_biguint().expect("nonnegative");
    if rem.is_zero() {
        q
    } else {
        q + 1u32
    }
}

/// `nat` as a `usize` when it fits.
pub fn nat_to_usize(n: &Nat) -> Option<usize> {
    n.to_usize()
}

pub fn pow2(k: usize) -> Nat {
    Nat::one() << k
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

pub fn zero_rat() -> Rational {
    Rational::zero()
}

pub fn one_rat() -> Rational {
    Rational::one()
}

/// Serde adapters for rationals written as `"p/q"` strings.
pub mod serde_rational {
    use super::{fmt_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&fmt_rational(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_rational(s).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod vec2 {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for row in v {
                let row: Vec<String> = row.iter().map(fmt_rational).collect();
                seq.serialize_element(&row)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<Rational>>, D::Error> {
            let v = Vec::<Vec<String>>::deserialize(d)?;
            v.iter()
                .map(|row| {
                    row.iter()
                        .map(|s| parse_rational(s).map_err(D::Error::custom))
                        .collect()
                })
                .collect()
        }
    }
}

/// Serde adapter for naturals written as decimal strings.
pub mod serde_nat {
    use super::Nat;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &Nat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Nat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}
