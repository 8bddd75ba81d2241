//! Joint laws over (messages, edge transmissions) and information measures.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::EdgeRef;
use crate::system::{Regime, SystemSpec};

pub mod discrete;
pub mod gaussian;

pub use discrete::{enumerate_joint, enumerate_joint_with_budget, DiscreteJoint, DEFAULT_BUDGET};
pub use gaussian::{linear_propagate, GaussianJoint};

/// The exact joint for a system: enumerated for finite alphabets, closed
/// form for linear-Gaussian systems.
pub fn exact_joint(spec: &SystemSpec) -> Result<Box<dyn InfoMeasure>> {
    exact_joint_with_budget(spec, DEFAULT_BUDGET)
}

pub fn exact_joint_with_budget(spec: &SystemSpec, budget: u128) -> Result<Box<dyn InfoMeasure>> {
    Ok(match spec.regime()? {
        Regime::Discrete => Box::new(enumerate_joint_with_budget(spec, budget)?),
        Regime::Gaussian => Box::new(linear_propagate(spec)?),
    })
}

/// A random variable of a joint: a named message or an edge transmission.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarId {
    Message(String),
    Edge(EdgeRef),
}

impl VarId {
    pub fn message(name: &str) -> Self {
        VarId::Message(name.to_string())
    }
}

impl From<EdgeRef> for VarId {
    fn from(e: EdgeRef) -> Self {
        VarId::Edge(e)
    }
}

impl From<&EdgeRef> for VarId {
    fn from(e: &EdgeRef) -> Self {
        VarId::Edge(e.clone())
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::Message(m) => write!(f, "{m}"),
            VarId::Edge(e) => write!(f, "{e}"),
        }
    }
}

impl FromStr for VarId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.contains("->") {
            Ok(VarId::Edge(s.parse()?))
        } else if s.trim().is_empty() {
            Err(Error::Parse("empty variable name".into()))
        } else {
            Ok(VarId::Message(s.trim().to_string()))
        }
    }
}

impl Serialize for VarId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VarId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Common interface of the exact discrete and linear-Gaussian engines.
///
/// Index-based methods take variable positions and assume disjoint sets;
/// the `VarId` wrappers check membership and disjointness.
pub trait InfoMeasure: Sync {
    fn variables(&self) -> &[VarId];

    fn index_of(&self, v: &VarId) -> Option<usize>;

    /// Whether `I(A; B | C) = 0`.
    fn independent(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<bool>;

    /// `I(A; B | C)` in bits; exactly 0 whenever `independent` holds.
    fn cmi_bits(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64>;

    fn is_constant(&self, v: usize) -> bool;

    /// Whether two variables are functions of each other.
    fn same_information(&self, u: usize, v: usize) -> bool {
        u == v
    }

    fn engine_name(&self) -> &'static str;

    fn var(&self, v: &VarId) -> Result<usize> {
        self.index_of(v).ok_or_else(|| Error::UnknownVariable(v.to_string()))
    }

    fn edge_var(&self, e: &EdgeRef) -> Result<usize> {
        self.var(&VarId::Edge(e.clone()))
    }

    fn message_var(&self, name: &str) -> Result<usize> {
        self.var(&VarId::message(name))
    }

    fn message_names(&self) -> Vec<String> {
        self.variables()
            .iter()
            .filter_map(|v| match v {
                VarId::Message(m) => Some(m.clone()),
                VarId::Edge(_) => None,
            })
            .collect()
    }

    /// `I(A; B | C)` in bits for disjoint named sets.
    fn cmi(&self, a: &[VarId], b: &[VarId], c: &[VarId]) -> Result<f64> {
        let (a, b, c) = self.resolve_disjoint(a, b, c)?;
        self.cmi_bits(&a, &b, &c)
    }

    /// Whether `I(A; B | C) = 0` for disjoint named sets.
    fn is_zero_cmi(&self, a: &[VarId], b: &[VarId], c: &[VarId]) -> Result<bool> {
        let (a, b, c) = self.resolve_disjoint(a, b, c)?;
        self.independent(&a, &b, &c)
    }

    #[allow(clippy::type_complexity)]
    fn resolve_disjoint(
        &self,
        a: &[VarId],
        b: &[VarId],
        c: &[VarId],
    ) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
        let mut seen = BTreeSet::new();
        let mut resolve = |set: &[VarId]| -> Result<Vec<usize>> {
            let mut out = Vec::with_capacity(set.len());
            for v in set {
                let i = self.var(v)?;
                if !seen.insert(i) {
                    return Err(Error::query(format!("variable {v} appears in more than one set")));
                }
                out.push(i);
            }
            Ok(out)
        };
        Ok((resolve(a)?, resolve(b)?, resolve(c)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn var_labels() {
        assert_eq!("M1".parse::<VarId>().unwrap(), VarId::message("M1"));
        assert_eq!(
            "A1->B2".parse::<VarId>().unwrap(),
            VarId::Edge(EdgeRef::at("A", "B", 1))
        );
    }
}
