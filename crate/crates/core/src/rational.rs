//! Exact rational arithmetic helpers.
//!
//! Every invariant in this crate is an exact rational. The backing integer is
//! `i128`; the quantities involved stay far below that range for every graph the
//! enumerators can produce, and overflow checks are enabled in all profiles so an
//! out-of-range computation aborts instead of wrapping.

use std::str::FromStr;

use num_integer::Integer;

/// Exact rational number used throughout the crate.
pub type Rational = num_rational::Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRationalError {
    pub literal: String,
    pub reason: &'static str,
}

/// `n/d` in lowest terms. Panics if `d == 0`.
pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

/// Parses `"p/q"` or `"p"`, normalizing to lowest terms with a positive denominator.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        literal: text.to_string(),
        reason,
    };
    let trimmed = text.trim();
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let num = i128::from_str(num).map_err(|_| err("numerator is not an integer"))?;
    let den = i128::from_str(den).map_err(|_| err("denominator is not an integer"))?;
    if den == 0 {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Persisted form: always `"p/q"` with `q > 0`, lowest terms.
pub fn format_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn ceil(value: &Rational) -> i128 {
    value.ceil().to_integer()
}

pub fn floor(value: &Rational) -> i128 {
    value.floor().to_integer()
}

/// Least common multiple of the denominators, `1` for an empty input.
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i128 {
    values
        .into_iter()
        .fold(1i128, |acc, v| acc.lcm(v.denom()))
}

pub fn min_rational<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    values.into_iter().copied().reduce(|a, b| if b < a { b } else { a })
}

/// Serde adapter storing a [`Rational`] as a `"p/q"` string. Integers are also
/// accepted on input.
pub mod serde_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    struct RationalVisitor;

    impl Visitor<'_> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as a \"p/q\" string or an integer")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            parse_rational(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(Rational::from_integer(v.into()))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            Ok(Rational::from_integer(v.into()))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }
}
