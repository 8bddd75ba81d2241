//! Computational systems: graph, message law, intrinsic noise and node
//! functions, plus the JSON file format.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::graph::{EdgeRef, NodeRef, UnrolledGraph};
use crate::value::Value;

/// Distribution of the message or of one node's intrinsic randomness.
#[derive(Clone, Debug, PartialEq)]
pub enum Law {
    /// Finite support with exact probabilities.
    Pmf(Vec<(Value, Rational64)>),
    /// Zero-mean scalar Gaussian.
    Gaussian { variance: f64 },
}

impl Law {
    /// Bernoulli(1/2) over {0, 1}.
    pub fn fair_bit() -> Law {
        Law::uniform(vec![Value::int(0), Value::int(1)])
    }

    pub fn bernoulli(p: Rational64) -> Law {
        Law::Pmf(vec![(Value::int(0), Rational64::one() - p), (Value::int(1), p)])
    }

    pub fn uniform(values: Vec<Value>) -> Law {
        let p = Rational64::new(1, values.len() as i64);
        Law::Pmf(values.into_iter().map(|v| (v, p)).collect())
    }

    pub fn constant(v: Value) -> Law {
        Law::Pmf(vec![(v, Rational64::one())])
    }

    pub fn gaussian(variance: f64) -> Law {
        Law::Gaussian { variance }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, Law::Gaussian { .. })
    }

    fn validate(&self, what: &str) -> Result<()> {
        match self {
            Law::Gaussian { variance } => {
                if !variance.is_finite() || *variance < 0.0 {
                    return Err(Error::invalid(format!("{what}: variance must be finite and non-negative")));
                }
            }
            Law::Pmf(support) => {
                if support.is_empty() {
                    return Err(Error::invalid(format!("{what}: empty support")));
                }
                let mut seen = BTreeSet::new();
                let mut total = Rational64::zero();
                for (v, p) in support {
                    if !p.is_positive() {
                        return Err(Error::invalid(format!("{what}: probability of {v} must be positive")));
                    }
                    if !seen.insert(v) {
                        return Err(Error::invalid(format!("{what}: value {v} listed twice")));
                    }
                    total += p;
                }
                if !total.is_one() {
                    return Err(Error::invalid(format!("{what}: probabilities sum to {total}, not 1")));
                }
            }
        }
        Ok(())
    }
}

/// Which information engine a system belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Discrete,
    Gaussian,
}

/// Name of the message view used when a system declares none.
pub const DEFAULT_MESSAGE: &str = "M";

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub graph: UnrolledGraph,
    /// Law of the root message read by input nodes.
    pub message: Law,
    /// Named messages whose flow can be tracked. Each is an expression over
    /// the root message and, for messages defined at the output, over edges.
    /// Empty means a single message `M` equal to the root.
    pub messages: BTreeMap<String, Expr>,
    /// Intrinsic randomness per node; absent nodes have constant-0 noise.
    pub noise: BTreeMap<NodeRef, Law>,
    /// Per node, one expression per outgoing destination name. Missing
    /// entries transmit the constant 0.
    pub functions: BTreeMap<NodeRef, BTreeMap<String, Expr>>,
    /// Time-0 nodes allowed to read the root message.
    pub declared_inputs: BTreeSet<NodeRef>,
}

impl SystemSpec {
    pub fn new(graph: UnrolledGraph, message: Law) -> Self {
        SystemSpec {
            graph,
            message,
            messages: BTreeMap::new(),
            noise: BTreeMap::new(),
            functions: BTreeMap::new(),
            declared_inputs: BTreeSet::new(),
        }
    }

    /// Set the transmission on `src_t -> dst_{t+1}`.
    pub fn send(&mut self, src: &str, dst: &str, t: usize, expr: Expr) -> &mut Self {
        self.functions
            .entry(NodeRef::new(src, t))
            .or_default()
            .insert(dst.to_string(), expr);
        self
    }

    pub fn set_noise(&mut self, node: &str, t: usize, law: Law) -> &mut Self {
        self.noise.insert(NodeRef::new(node, t), law);
        self
    }

    pub fn add_input(&mut self, node: &str) -> &mut Self {
        self.declared_inputs.insert(NodeRef::new(node, 0));
        self
    }

    pub fn add_message(&mut self, name: &str, expr: Expr) -> &mut Self {
        self.messages.insert(name.to_string(), expr);
        self
    }

    /// Effective named messages (the default `M` when none are declared).
    pub fn message_views(&self) -> BTreeMap<String, Expr> {
        if self.messages.is_empty() {
            BTreeMap::from([(DEFAULT_MESSAGE.to_string(), Expr::Message)])
        } else {
            self.messages.clone()
        }
    }

    pub fn message_names(&self) -> Vec<String> {
        self.message_views().into_keys().collect()
    }

    /// The expression for edge `e`, if one was given.
    pub fn function(&self, e: &EdgeRef) -> Option<&Expr> {
        self.functions.get(&e.src)?.get(&e.dst.name)
    }

    pub fn regime(&self) -> Result<Regime> {
        let gaussian = self.message.is_gaussian();
        if self.noise.values().any(|l| l.is_gaussian() != gaussian) {
            return Err(Error::invalid(
                "mixed discrete and Gaussian laws are not supported; use one regime throughout",
            ));
        }
        Ok(if gaussian { Regime::Gaussian } else { Regime::Discrete })
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.graph;
        self.message.validate("message law")?;
        self.regime()?;
        for (v, law) in &self.noise {
            if !g.contains_node(v) {
                return Err(Error::invalid(format!("noise given for unknown node {v}")));
            }
            law.validate(&format!("noise at {v}"))?;
        }
        for v in &self.declared_inputs {
            if v.time != 0 || !g.contains_node(v) {
                return Err(Error::invalid(format!("declared input {v} must be a time-0 node of the graph")));
            }
        }
        for (v, outs) in &self.functions {
            if !g.contains_node(v) || v.time >= g.horizon() {
                return Err(Error::invalid(format!("function given for {v}, which has no outgoing edges")));
            }
            let incoming: BTreeSet<EdgeRef> = g.incoming(v)?.into_iter().collect();
            for (dst, expr) in outs {
                if !g.allows(&v.name, dst) {
                    return Err(Error::invalid(format!("{v} has no edge to {dst}")));
                }
                for e in expr.edges() {
                    if !incoming.contains(e) {
                        return Err(Error::invalid(format!(
                            "function of {v} towards {dst} reads {e}, which does not enter {v}"
                        )));
                    }
                }
                if expr.uses_message() && !self.declared_inputs.contains(v) {
                    return Err(Error::invalid(format!("{v} reads the message but is not a declared input")));
                }
            }
        }
        for (name, expr) in &self.messages {
            if name.is_empty() || name.contains("->") {
                return Err(Error::invalid(format!("bad message name {name:?}")));
            }
            if expr.uses_noise() {
                return Err(Error::invalid(format!("message {name} cannot read node noise directly")));
            }
            for e in expr.edges() {
                if !g.contains_edge(e) {
                    return Err(Error::invalid(format!("message {name} reads unknown edge {e}")));
                }
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let spec = file.into_spec()?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Json {
        serde_json::to_value(SpecFile::from_spec(self)).expect("spec serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("spec serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LawFile {
    Pmf(Vec<(Value, Value)>),
    Gaussian(f64),
}

impl LawFile {
    fn from_law(l: &Law) -> Self {
        match l {
            Law::Gaussian { variance } => LawFile::Gaussian(*variance),
            Law::Pmf(s) => LawFile::Pmf(
                s.iter()
                    .map(|(v, p)| (v.clone(), Value::Num(crate::value::GaussRat::real(*p))))
                    .collect(),
            ),
        }
    }

    fn into_law(self) -> Result<Law> {
        Ok(match self {
            LawFile::Gaussian(variance) => Law::Gaussian { variance },
            LawFile::Pmf(s) => Law::Pmf(
                s.into_iter()
                    .map(|(v, p)| {
                        let g = p.num().map_err(|_| Error::Parse(format!("bad probability {p}")))?;
                        if !g.is_real() {
                            return Err(Error::Parse(format!("bad probability {p}")));
                        }
                        Ok((v, g.re))
                    })
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

#[derive(Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct SpecFile {
    nodes: Vec<String>,
    horizon: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    adjacency: Option<Vec<(String, String)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<LawFile>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    messages: BTreeMap<String, Json>,
    noise: BTreeMap<String, LawFile>,
    functions: BTreeMap<String, BTreeMap<String, Json>>,
    declared_inputs: Vec<String>,
}

impl SpecFile {
    fn from_spec(s: &SystemSpec) -> Self {
        SpecFile {
            nodes: s.graph.node_names().to_vec(),
            horizon: s.graph.horizon(),
            adjacency: (!s.graph.is_complete()).then(|| s.graph.base_edges()),
            message: Some(LawFile::from_law(&s.message)),
            messages: s.messages.iter().map(|(k, e)| (k.clone(), e.to_json())).collect(),
            noise: s.noise.iter().map(|(v, l)| (v.to_string(), LawFile::from_law(l))).collect(),
            functions: s
                .functions
                .iter()
                .map(|(v, outs)| {
                    (v.to_string(), outs.iter().map(|(d, e)| (d.clone(), e.to_json())).collect())
                })
                .collect(),
            declared_inputs: s.declared_inputs.iter().map(|v| v.to_string()).collect(),
        }
    }

    fn into_spec(self) -> Result<SystemSpec> {
        let graph = UnrolledGraph::unroll(self.nodes, self.horizon, self.adjacency)?;
        let message = self
            .message
            .ok_or_else(|| Error::invalid("message law missing"))?
            .into_law()?;
        let mut spec = SystemSpec::new(graph, message);
        for (name, e) in self.messages {
            spec.messages.insert(name, Expr::from_json(&e)?);
        }
        for (v, l) in self.noise {
            spec.noise.insert(v.parse()?, l.into_law()?);
        }
        for (v, outs) in self.functions {
            let v: NodeRef = v.parse()?;
            let slot = spec.functions.entry(v).or_default();
            for (dst, e) in outs {
                slot.insert(dst, Expr::from_json(&e)?);
            }
        }
        for v in self.declared_inputs {
            spec.declared_inputs.insert(v.parse()?);
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relay() -> SystemSpec {
        let g = UnrolledGraph::complete(&["A", "B"], 2).unwrap();
        let mut s = SystemSpec::new(g, Law::fair_bit());
        s.add_input("A")
            .send("A", "B", 0, Expr::xor(vec![Expr::Message, Expr::Noise]))
            .set_noise("A", 0, Law::bernoulli(Rational64::new(1, 4)))
            .send("B", "B", 1, Expr::edge("A", "B", 0));
        s
    }

    #[test]
    fn json_round_trip_is_identity() {
        let s = relay();
        s.validate().unwrap();
        let text = s.to_json_string();
        assert_eq!(SystemSpec::from_json_str(&text).unwrap(), s);
    }

    #[test]
    fn empty_document_fails_validation() {
        assert!(matches!(SystemSpec::from_json_str("{}"), Err(Error::Validation(_))));
        assert!(matches!(SystemSpec::from_json_str("{nodes"), Err(Error::Parse(_))));
    }

    #[test]
    fn illegal_reads_are_rejected() {
        let mut s = relay();
        s.send("B", "A", 1, Expr::edge("B", "B", 0));
        assert!(s.validate().is_ok());
        s.send("B", "A", 1, Expr::edge("A", "A", 0));
        assert!(s.validate().is_err());
        s.send("B", "A", 1, Expr::edge("A", "B", 1));
        assert!(s.validate().is_err());

        let mut s = relay();
        s.send("B", "B", 0, Expr::Message);
        assert!(s.validate().is_err());

        let mut s = relay();
        s.set_noise("B", 1, Law::gaussian(1.0));
        assert!(s.validate().is_err());

        let mut s = relay();
        s.message = Law::Pmf(vec![(Value::int(0), Rational64::new(1, 3))]);
        assert!(s.validate().is_err());
    }
}
