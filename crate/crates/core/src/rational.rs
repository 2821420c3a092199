//! Exact rational scalars and their textual forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// The scalar type used everywhere in this crate. Arbitrary precision, never rounds.
pub type Rat = BigRational;

/// Small-literal constructor, mostly for tests and fixtures. Panics on zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Integer-valued rational.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumberError {
    #[error("empty number")]
    Empty,
    #[error("malformed number {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

fn digits_to_int(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::parse_bytes(s.as_bytes(), 10)
}

/// Parse a rational from decimal ("6.1"), fraction ("3/2"), or integer ("7") form.
///
/// An optional leading sign is allowed. Whitespace, exponents, and decimals
/// inside fractions are not.
pub fn parse_number(input: &str) -> Result<Rat, NumberError> {
    if input.is_empty() {
        return Err(NumberError::Empty);
    }
    let (neg, body) = match input.as_bytes()[0] {
        b'-' => (true, &input[1..]),
        b'+' => (false, &input[1..]),
        _ => (false, input),
    };
    if body.is_empty() {
        return Err(NumberError::Malformed(input.to_string()));
    }
    let malformed = || NumberError::Malformed(input.to_string());
    let mag = if let Some((n, d)) = body.split_once('/') {
        let num = digits_to_int(n).ok_or_else(malformed)?;
        let den = digits_to_int(d).ok_or_else(malformed)?;
        if den.is_zero() {
            return Err(NumberError::ZeroDenominator(input.to_string()));
        }
        Rat::new(num, den)
    } else if let Some((int, frac)) = body.split_once('.') {
        if int.is_empty() && frac.is_empty() {
            return Err(malformed());
        }
        let int_part = if int.is_empty() { BigInt::zero() } else { digits_to_int(int).ok_or_else(malformed)? };
        let frac_part = if frac.is_empty() { BigInt::zero() } else { digits_to_int(frac).ok_or_else(malformed)? };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        Rat::new(int_part * &scale + frac_part, scale)
    } else {
        Rat::from_integer(digits_to_int(body).ok_or_else(malformed)?)
    };
    Ok(if neg { -mag } else { mag })
}

/// Canonical text form: integers print bare ("7"), everything else as "p/q" in lowest terms.
pub fn format_number(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Best-effort f64 view, for display columns only. Never used in computation.
pub fn approx(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Serde bridge: rationals travel as strings in the canonical text form.
pub mod serde_rat {
    use super::{format_number, parse_number, Rat};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_number(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let text = String::deserialize(d)?;
        parse_number(&text).map_err(D::Error::custom)
    }
}

/// Same bridge for vectors of rationals.
pub mod serde_rat_vec {
    use super::{format_number, parse_number, Rat};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_number))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts.iter().map(|t| parse_number(t).map_err(D::Error::custom)).collect()
    }
}
