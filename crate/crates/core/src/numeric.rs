//! Exact rationals for exponent algebra and an extended real for class constants.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rat) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Exact rational closest to a float (exact binary expansion).
pub fn from_f64(x: f64) -> Result<Rat> {
    Rat::from_float(x).ok_or_else(|| crate::error::Error::InvalidInput(format!("non-finite number {x}")))
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    if let Some((a, b)) = t.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| bad(t))?;
        let d: BigInt = b.trim().parse().map_err(|_| bad(t))?;
        if d.is_zero() {
            return invalid(format!("zero denominator in {t}"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Ok(n) = t.parse::<BigInt>() {
        return Ok(Rat::from_integer(n));
    }
    // Decimal literals are read exactly, so "0.25" is 1/4.
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.chars().all(|c| c.is_ascii_digit()) && !fp.is_empty() {
            let neg = ip.starts_with('-');
            let ip_digits = ip.trim_start_matches(['-', '+']);
            let whole: BigInt = if ip_digits.is_empty() { BigInt::zero() } else { ip_digits.parse().map_err(|_| bad(t))? };
            let frac: BigInt = fp.parse().map_err(|_| bad(t))?;
            let scale = num_traits::pow(BigInt::from(10), fp.len());
            let v = Rat::new(whole * &scale + frac, scale);
            return Ok(if neg { -v } else { v });
        }
    }
    Err(bad(t))
}

fn bad(s: &str) -> crate::error::Error {
    crate::error::Error::InvalidInput(format!("not a rational number: {s:?}"))
}

pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Hölder conjugate; `None` stands for the conjugate of 1, which is infinite.
pub fn conj(r: &Rat) -> Option<Rat> {
    if r.is_one() {
        None
    } else {
        Some(r / (r - Rat::one()))
    }
}

pub fn is_pos(r: &Rat) -> bool {
    r.is_positive()
}

/// Serde adapter: rationals travel as strings like "3/2".
pub mod serde_rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        d.deserialize_any(RatVisitor)
    }

    pub(super) struct RatVisitor;

    impl Visitor<'_> for RatVisitor {
        type Value = Rat;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as string \"a/b\", integer, or float")
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rat, E> {
            parse_rat(v).map_err(E::custom)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rat, E> {
            Ok(int(v))
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rat, E> {
            Ok(Rat::from_integer(BigInt::from(v)))
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rat, E> {
            // Floats are read through their shortest decimal form.
            parse_rat(&format!("{v:?}")).map_err(E::custom)
        }
    }
}

pub mod serde_rat_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&fmt_rat(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let raw: Vec<RatDe> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|r| r.0).collect())
    }

    struct RatDe(Rat);
    impl<'de> Deserialize<'de> for RatDe {
        fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
            d.deserialize_any(super::serde_rat::RatVisitor).map(RatDe)
        }
    }
}

pub mod serde_rat_opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_str(&fmt_rat(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rat>, D::Error> {
        let v: Option<serde_json::Value> = Option::deserialize(d)?;
        match v {
            None | Some(serde_json::Value::Null) => Ok(None),
            Some(serde_json::Value::String(s)) => parse_rat(&s).map(Some).map_err(de::Error::custom),
            Some(serde_json::Value::Number(n)) => parse_rat(&n.to_string()).map(Some).map_err(de::Error::custom),
            Some(other) => Err(de::Error::custom(format!("not a rational: {other}"))),
        }
    }
}

/// Non-negative extended real. Serializes `+inf` as the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ExtReal(pub f64);

impl ExtReal {
    pub const INF: ExtReal = ExtReal(f64::INFINITY);

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => Ok(ExtReal(n.as_f64().unwrap_or(f64::NAN))),
            serde_json::Value::String(s) if s == "inf" => Ok(ExtReal::INF),
            other => Err(de::Error::custom(format!("expected number or \"inf\", got {other}"))),
        }
    }
}
