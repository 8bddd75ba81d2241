//! Exact transmission values: Gaussian rationals and tuples of them.
//!
//! Every scalar is `re + im·j` with both parts rational, so bits, integers,
//! rationals and the complex roots of unity used by FFT butterflies all share
//! one exact representation.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussRat {
    pub re: Rational64,
    pub im: Rational64,
}

fn overflow() -> Error {
    Error::Eval("rational overflow".into())
}

impl GaussRat {
    pub fn new(re: Rational64, im: Rational64) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: Rational64) -> Self {
        GaussRat { re, im: Rational64::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self> {
        Ok(GaussRat {
            re: self.re.checked_add(&o.re).ok_or_else(overflow)?,
            im: self.im.checked_add(&o.im).ok_or_else(overflow)?,
        })
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self> {
        Ok(GaussRat {
            re: self.re.checked_sub(&o.re).ok_or_else(overflow)?,
            im: self.im.checked_sub(&o.im).ok_or_else(overflow)?,
        })
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self> {
        let m = |a: &Rational64, b: &Rational64| a.checked_mul(b).ok_or_else(overflow);
        let rr = m(&self.re, &o.re)?;
        let ii = m(&self.im, &o.im)?;
        let ri = m(&self.re, &o.im)?;
        let ir = m(&self.im, &o.re)?;
        Ok(GaussRat {
            re: rr.checked_sub(&ii).ok_or_else(overflow)?,
            im: ri.checked_add(&ir).ok_or_else(overflow)?,
        })
    }

    pub fn neg(&self) -> Self {
        GaussRat { re: -self.re, im: -self.im }
    }
}

fn fmt_ratio(r: &Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let imag = |im: &Rational64| {
            if im.is_one() {
                "j".to_string()
            } else if (-*im).is_one() {
                "-j".to_string()
            } else {
                format!("{}j", fmt_ratio(im))
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_ratio(&self.re)),
            (true, false) => write!(f, "{}", imag(&self.im)),
            (false, false) => {
                let im = imag(&self.im);
                let sep = if self.im.is_negative() { "" } else { "+" };
                write!(f, "{}{sep}{im}", fmt_ratio(&self.re))
            }
        }
    }
}

fn parse_ratio(s: &str) -> Result<Rational64> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(n, d))
        }
        None => Ok(Rational64::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

impl FromStr for GaussRat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(body) = s.strip_suffix('j') else {
            return Ok(GaussRat::real(parse_ratio(s)?));
        };
        // split "re±im" at the last sign that is not a leading sign
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (parse_ratio(&body[..i])?, &body[i..]),
            None => (Rational64::zero(), body),
        };
        let im = match im.trim_start_matches('+') {
            "" => Rational64::one(),
            "-" => -Rational64::one(),
            rest => parse_ratio(rest)?,
        };
        Ok(GaussRat::new(re, im))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Num(GaussRat),
    Tuple(Vec<Value>),
}

impl Default for Value {
    fn default() -> Self {
        Value::zero()
    }
}

impl Value {
    pub fn zero() -> Self {
        Value::int(0)
    }

    pub fn int(i: i64) -> Self {
        Value::Num(GaussRat::real(Rational64::from_integer(i)))
    }

    pub fn bit(b: bool) -> Self {
        Value::int(b as i64)
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Value::Num(GaussRat::real(Rational64::new(n, d)))
    }

    pub fn complex(re: Rational64, im: Rational64) -> Self {
        Value::Num(GaussRat::new(re, im))
    }

    pub fn tuple(items: Vec<Value>) -> Self {
        Value::Tuple(items)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Num(g) if g.is_zero())
    }

    pub fn num(&self) -> Result<GaussRat> {
        match self {
            Value::Num(g) => Ok(*g),
            Value::Tuple(_) => Err(Error::Eval(format!("expected a number, got tuple {self}"))),
        }
    }

    pub fn int_value(&self) -> Result<i64> {
        let g = self.num()?;
        if g.is_real() && g.re.is_integer() {
            Ok(*g.re.numer())
        } else {
            Err(Error::Eval(format!("expected an integer, got {self}")))
        }
    }

    pub fn bit_value(&self) -> Result<bool> {
        match self.int_value() {
            Ok(0) => Ok(false),
            Ok(1) => Ok(true),
            _ => Err(Error::Eval(format!("expected a bit, got {self}"))),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Tuple(items) => serde_json::Value::Array(items.iter().map(Value::to_json).collect()),
            Value::Num(g) => match self.int_value() {
                Ok(i) => serde_json::Value::from(i),
                Err(_) => serde_json::Value::String(g.to_string()),
            },
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(Value::int)
                .ok_or_else(|| Error::Parse(format!("non-integer number {n}; write rationals as strings like \"1/4\""))),
            serde_json::Value::String(s) => Ok(Value::Num(s.parse()?)),
            serde_json::Value::Bool(b) => Ok(Value::bit(*b)),
            serde_json::Value::Array(items) => {
                Ok(Value::Tuple(items.iter().map(Value::from_json).collect::<Result<_>>()?))
            }
            other => Err(Error::Parse(format!("cannot read value from {other}"))),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(g) => write!(f, "{g}"),
            Value::Tuple(items) => {
                write!(f, "(")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for Value {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(inner) = s.strip_prefix('(') else {
            return Ok(Value::Num(s.parse()?));
        };
        let inner = inner
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("unbalanced tuple {s:?}")))?;
        if inner.trim().is_empty() {
            return Ok(Value::Tuple(Vec::new()));
        }
        let mut items = Vec::new();
        let (mut depth, mut start) = (0usize, 0usize);
        for (i, c) in inner.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ';' if depth == 0 => {
                    items.push(inner[start..i].parse()?);
                    start = i + 1;
                }
                _ => {}
            }
        }
        items.push(inner[start..].parse()?);
        Ok(Value::Tuple(items))
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Value::from_json(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn complex_arithmetic_is_exact() {
        let j = GaussRat::new(q(0, 1), q(1, 1));
        let minus_one = j.checked_mul(&j).unwrap();
        assert_eq!(minus_one, GaussRat::real(q(-1, 1)));
        let a = GaussRat::new(q(1, 2), q(1, 4));
        let b = GaussRat::new(q(1, 3), q(-1, 2));
        // (1/2 + j/4)(1/3 - j/2) = 1/6 + 1/8 + j(-1/4 + 1/12)
        assert_eq!(a.checked_mul(&b).unwrap(), GaussRat::new(q(7, 24), q(-1, 6)));
    }

    #[test]
    fn scalar_text_round_trip() {
        for s in ["0", "-3", "1/4", "j", "-j", "1/2j", "1/2+1/4j", "-1/2-j", "3-2/3j"] {
            let g: GaussRat = s.parse().unwrap();
            assert_eq!(g.to_string(), s, "{s}");
        }
    }

    #[test]
    fn tuple_text_round_trip() {
        let v = Value::tuple(vec![Value::int(1), Value::tuple(vec![Value::ratio(1, 4), Value::zero()])]);
        assert_eq!(v.to_string(), "(1;(1/4;0))");
        assert_eq!(v.to_string().parse::<Value>().unwrap(), v);
    }

    #[test]
    fn json_round_trip() {
        let v = Value::tuple(vec![Value::int(1), Value::complex(q(1, 2), q(-1, 1))]);
        let j = serde_json::to_string(&v).unwrap();
        assert_eq!(j, r#"[1,"1/2-j"]"#);
        assert_eq!(serde_json::from_str::<Value>(&j).unwrap(), v);
    }

    #[test]
    fn overflow_is_reported() {
        let big = GaussRat::real(q(i64::MAX, 1));
        assert!(big.checked_mul(&big).is_err());
    }
}
