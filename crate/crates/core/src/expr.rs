//! Expression trees for per-edge node functions.
//!
//! JSON form is prefix notation in nested arrays, e.g.
//! `["xor", ["edge", "A0", "B1"], ["noise"]]`.

use num_rational::Rational64;
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::graph::EdgeRef;
use crate::value::{GaussRat, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Transmission on an incoming edge.
    Edge(EdgeRef),
    /// The node's own intrinsic randomness.
    Noise,
    /// The root message (input nodes only).
    Message,
    Const(Value),
    Xor(Vec<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Select(usize, Box<Expr>),
    Concat(Vec<Expr>),
    Mod(i64, Box<Expr>),
}

impl Expr {
    pub fn edge(src: &str, dst: &str, t: usize) -> Self {
        Expr::Edge(EdgeRef::at(src, dst, t))
    }

    pub fn int(i: i64) -> Self {
        Expr::Const(Value::int(i))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expr::Const(Value::ratio(n, d))
    }

    pub fn complex(re: Rational64, im: Rational64) -> Self {
        Expr::Const(Value::complex(re, im))
    }

    pub fn xor(items: Vec<Expr>) -> Self {
        Expr::Xor(items)
    }

    pub fn add(items: Vec<Expr>) -> Self {
        Expr::Add(items)
    }

    pub fn mul(items: Vec<Expr>) -> Self {
        Expr::Mul(items)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Expr) -> Self {
        Expr::Not(Box::new(a))
    }

    pub fn select(k: usize, a: Expr) -> Self {
        Expr::Select(k, Box::new(a))
    }

    /// Child expressions in order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Edge(_) | Expr::Noise | Expr::Message | Expr::Const(_) => Vec::new(),
            Expr::Xor(v) | Expr::And(v) | Expr::Or(v) | Expr::Add(v) | Expr::Mul(v) | Expr::Concat(v) => {
                v.iter().collect()
            }
            Expr::Not(a) | Expr::Neg(a) | Expr::Select(_, a) | Expr::Mod(_, a) => vec![a],
            Expr::Sub(a, b) => vec![a, b],
        }
    }

    /// Every leaf satisfying `pred`, depth first.
    fn any_leaf(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any_leaf(pred))
    }

    pub fn edges(&self) -> Vec<&EdgeRef> {
        let mut out = Vec::new();
        self.collect_edges(&mut out);
        out
    }

    fn collect_edges<'a>(&'a self, out: &mut Vec<&'a EdgeRef>) {
        if let Expr::Edge(e) = self {
            out.push(e);
        }
        for c in self.children() {
            c.collect_edges(out);
        }
    }

    pub fn uses_noise(&self) -> bool {
        self.any_leaf(&|e| matches!(e, Expr::Noise))
    }

    pub fn uses_message(&self) -> bool {
        self.any_leaf(&|e| matches!(e, Expr::Message))
    }

    pub fn to_json(&self) -> Json {
        let many = |op: &str, v: &[Expr]| {
            let mut out = vec![json!(op)];
            out.extend(v.iter().map(Expr::to_json));
            Json::Array(out)
        };
        match self {
            Expr::Edge(e) => json!(["edge", e.src.to_string(), e.dst.to_string()]),
            Expr::Noise => json!(["noise"]),
            Expr::Message => json!(["message"]),
            Expr::Const(Value::Num(g)) if !g.is_real() => {
                json!(["complex", GaussRat::real(g.re).to_string(), GaussRat::real(g.im).to_string()])
            }
            Expr::Const(v) => json!(["const", v.to_json()]),
            Expr::Xor(v) => many("xor", v),
            Expr::And(v) => many("and", v),
            Expr::Or(v) => many("or", v),
            Expr::Add(v) => many("add", v),
            Expr::Mul(v) => many("mul", v),
            Expr::Concat(v) => many("concat", v),
            Expr::Not(a) => json!(["not", a.to_json()]),
            Expr::Neg(a) => json!(["neg", a.to_json()]),
            Expr::Sub(a, b) => json!(["sub", a.to_json(), b.to_json()]),
            Expr::Select(k, a) => json!(["select", k, a.to_json()]),
            Expr::Mod(q, a) => json!(["mod", q, a.to_json()]),
        }
    }

    pub fn from_json(j: &Json) -> Result<Expr> {
        let bad = |why: &str| Error::Parse(format!("bad expression {j}: {why}"));
        let items = match j {
            Json::Array(items) if !items.is_empty() => items,
            Json::Number(_) | Json::String(_) => return Ok(Expr::Const(Value::from_json(j)?)),
            _ => return Err(bad("expected a non-empty array")),
        };
        let op = items[0].as_str().ok_or_else(|| bad("operator must be a string"))?;
        let args = &items[1..];
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("{op} takes {n} argument(s)")))
            }
        };
        let sub = |i: usize| Expr::from_json(&args[i]).map(Box::new);
        let all = || args.iter().map(Expr::from_json).collect::<Result<Vec<_>>>();
        let nonempty = || {
            if args.is_empty() {
                Err(bad(&format!("{op} needs operands")))
            } else {
                all()
            }
        };
        let text = |v: &Json| -> Result<String> {
            match v {
                Json::String(s) => Ok(s.clone()),
                Json::Number(n) => Ok(n.to_string()),
                _ => Err(bad("expected a label")),
            }
        };
        let uint = |v: &Json| v.as_u64().ok_or_else(|| bad("expected a non-negative integer"));
        Ok(match op {
            "edge" => {
                arity(2)?;
                Expr::Edge(EdgeRef::new(text(&args[0])?.parse()?, text(&args[1])?.parse()?))
            }
            "noise" => {
                arity(0)?;
                Expr::Noise
            }
            "message" => {
                arity(0)?;
                Expr::Message
            }
            "const" => {
                arity(1)?;
                Expr::Const(Value::from_json(&args[0])?)
            }
            "complex" => {
                arity(2)?;
                let part = |v: &Json| -> Result<Rational64> {
                    let g: GaussRat = text(v)?.parse()?;
                    if g.is_real() {
                        Ok(g.re)
                    } else {
                        Err(bad("complex parts must be real"))
                    }
                };
                Expr::complex(part(&args[0])?, part(&args[1])?)
            }
            "xor" => Expr::Xor(nonempty()?),
            "and" => Expr::And(nonempty()?),
            "or" => Expr::Or(nonempty()?),
            "add" => Expr::Add(nonempty()?),
            "mul" => Expr::Mul(nonempty()?),
            "concat" => Expr::Concat(nonempty()?),
            "not" => {
                arity(1)?;
                Expr::Not(sub(0)?)
            }
            "neg" | "negate" => {
                arity(1)?;
                Expr::Neg(sub(0)?)
            }
            "sub" => {
                arity(2)?;
                Expr::Sub(sub(0)?, sub(1)?)
            }
            "select" => {
                arity(2)?;
                Expr::Select(uint(&args[0])? as usize, sub(1)?)
            }
            "mod" => {
                arity(2)?;
                let q = uint(&args[0])?;
                if q == 0 {
                    return Err(bad("modulus must be positive"));
                }
                Expr::Mod(q as i64, sub(1)?)
            }
            other => return Err(bad(&format!("unknown operator {other:?}"))),
        })
    }
}

/// An expression whose edge leaves have been resolved to value slots.
#[derive(Clone, Debug)]
pub(crate) enum Compiled {
    Slot(usize),
    Noise,
    Message,
    Const(Value),
    Xor(Vec<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
    Not(Box<Compiled>),
    Add(Vec<Compiled>),
    Sub(Box<Compiled>, Box<Compiled>),
    Mul(Vec<Compiled>),
    Neg(Box<Compiled>),
    Select(usize, Box<Compiled>),
    Concat(Vec<Compiled>),
    Mod(i64, Box<Compiled>),
}

pub(crate) struct Inputs<'a> {
    pub slots: &'a [Value],
    pub noise: &'a Value,
    pub message: &'a Value,
}

impl Compiled {
    pub fn new(e: &Expr, slot: &dyn Fn(&EdgeRef) -> Result<usize>) -> Result<Compiled> {
        let many = |v: &[Expr]| v.iter().map(|x| Compiled::new(x, slot)).collect::<Result<Vec<_>>>();
        let one = |x: &Expr| Compiled::new(x, slot).map(Box::new);
        Ok(match e {
            Expr::Edge(r) => Compiled::Slot(slot(r)?),
            Expr::Noise => Compiled::Noise,
            Expr::Message => Compiled::Message,
            Expr::Const(v) => Compiled::Const(v.clone()),
            Expr::Xor(v) => Compiled::Xor(many(v)?),
            Expr::And(v) => Compiled::And(many(v)?),
            Expr::Or(v) => Compiled::Or(many(v)?),
            Expr::Add(v) => Compiled::Add(many(v)?),
            Expr::Mul(v) => Compiled::Mul(many(v)?),
            Expr::Concat(v) => Compiled::Concat(many(v)?),
            Expr::Not(a) => Compiled::Not(one(a)?),
            Expr::Neg(a) => Compiled::Neg(one(a)?),
            Expr::Sub(a, b) => Compiled::Sub(one(a)?, one(b)?),
            Expr::Select(k, a) => Compiled::Select(*k, one(a)?),
            Expr::Mod(q, a) => Compiled::Mod(*q, one(a)?),
        })
    }

    pub fn eval(&self, x: &Inputs<'_>) -> Result<Value> {
        let bits = |v: &[Compiled]| -> Result<Vec<bool>> {
            v.iter().map(|c| c.eval(x)?.bit_value()).collect()
        };
        let nums = |v: &[Compiled]| -> Result<Vec<GaussRat>> {
            v.iter().map(|c| c.eval(x)?.num()).collect()
        };
        Ok(match self {
            Compiled::Slot(i) => x.slots[*i].clone(),
            Compiled::Noise => x.noise.clone(),
            Compiled::Message => x.message.clone(),
            Compiled::Const(v) => v.clone(),
            Compiled::Xor(v) => Value::bit(bits(v)?.into_iter().fold(false, |a, b| a ^ b)),
            Compiled::And(v) => Value::bit(bits(v)?.into_iter().all(|b| b)),
            Compiled::Or(v) => Value::bit(bits(v)?.into_iter().any(|b| b)),
            Compiled::Not(a) => Value::bit(!a.eval(x)?.bit_value()?),
            Compiled::Add(v) => {
                let mut acc = GaussRat::real(0.into());
                for g in nums(v)? {
                    acc = acc.checked_add(&g)?;
                }
                Value::Num(acc)
            }
            Compiled::Mul(v) => {
                let mut acc = GaussRat::real(1.into());
                for g in nums(v)? {
                    acc = acc.checked_mul(&g)?;
                }
                Value::Num(acc)
            }
            Compiled::Sub(a, b) => Value::Num(a.eval(x)?.num()?.checked_sub(&b.eval(x)?.num()?)?),
            Compiled::Neg(a) => Value::Num(a.eval(x)?.num()?.neg()),
            Compiled::Select(k, a) => match a.eval(x)? {
                Value::Tuple(mut items) if *k < items.len() => items.swap_remove(*k),
                other => return Err(Error::Eval(format!("cannot select component {k} of {other}"))),
            },
            Compiled::Concat(v) => {
                let mut out = Vec::new();
                for c in v {
                    match c.eval(x)? {
                        Value::Tuple(items) => out.extend(items),
                        scalar => out.push(scalar),
                    }
                }
                Value::Tuple(out)
            }
            Compiled::Mod(q, a) => Value::int(a.eval(x)?.int_value()?.rem_euclid(*q)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(e: &Expr, slots: &[Value], noise: Value, message: Value) -> Result<Value> {
        let ids: Vec<EdgeRef> = vec![EdgeRef::at("A", "B", 0), EdgeRef::at("C", "B", 0)];
        let c = Compiled::new(e, &|r| {
            ids.iter().position(|x| x == r).ok_or_else(|| Error::UnknownVariable(r.to_string()))
        })?;
        c.eval(&Inputs { slots, noise: &noise, message: &message })
    }

    #[test]
    fn json_round_trip() {
        let src = r#"["xor",["edge","A0","B1"],["noise"],["and",["const",1],["not",["message"]]]]"#;
        let e = Expr::from_json(&serde_json::from_str(src).unwrap()).unwrap();
        assert_eq!(e.to_json().to_string(), src);
        let c = r#"["mul",["complex","0","-1"],["select",1,["concat",["const",[1,"1/4"]]]]]"#;
        let e = Expr::from_json(&serde_json::from_str(c).unwrap()).unwrap();
        assert_eq!(Expr::from_json(&e.to_json()).unwrap(), e);
    }

    #[test]
    fn boolean_and_arithmetic() {
        let bits = [Value::int(1), Value::int(0)];
        let x = Expr::xor(vec![Expr::edge("A", "B", 0), Expr::edge("C", "B", 0), Expr::Noise]);
        assert_eq!(eval(&x, &bits, Value::int(1), Value::zero()).unwrap(), Value::int(0));
        let m = Expr::Mod(3, Box::new(Expr::add(vec![Expr::int(5), Expr::Message])));
        assert_eq!(eval(&m, &bits, Value::zero(), Value::int(2)).unwrap(), Value::int(1));
        let j = Expr::complex(0.into(), 1.into());
        let sq = Expr::mul(vec![j.clone(), j]);
        assert_eq!(eval(&sq, &bits, Value::zero(), Value::zero()).unwrap(), Value::int(-1));
    }

    #[test]
    fn type_mismatch_is_an_error() {
        let e = Expr::xor(vec![Expr::int(2), Expr::int(1)]);
        assert!(eval(&e, &[], Value::zero(), Value::zero()).is_err());
        let s = Expr::select(3, Expr::Concat(vec![Expr::int(1)]));
        assert!(eval(&s, &[], Value::zero(), Value::zero()).is_err());
        assert!(Expr::from_json(&serde_json::json!(["frobnicate", 1])).is_err());
        assert!(Expr::from_json(&serde_json::json!(["not"])).is_err());
    }
}
