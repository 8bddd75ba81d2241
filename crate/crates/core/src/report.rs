//! Flow reports and their JSON form.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::{EdgeRef, UnrolledGraph};

/// Serialize bit values with `+∞` written as the string `"inf"`.
pub mod bits {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() => "inf".serialize(s),
            other => other.serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Num(x)) => Ok(Some(x)),
            Some(Raw::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
            Some(Raw::Text(t)) => Err(serde::de::Error::custom(format!("bad bit value {t:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub edge: EdgeRef,
    pub has_flow: bool,
    /// Conditioning set that exposes the dependence, when flow was found.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<EdgeRef>>,
    #[serde(default, with = "bits", skip_serializing_if = "Option::is_none")]
    pub quantified: Option<f64>,
    /// Sampled engine only: p-value of the deciding test (or the smallest one).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

/// Split of one time slice into flowing and silent edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub time: usize,
    pub flowing: Vec<EdgeRef>,
    pub silent: Vec<EdgeRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub message: String,
    pub engine: String,
    pub horizon: usize,
    pub edges: Vec<EdgeEntry>,
    pub partitions: Vec<Partition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FlowReport {
    /// Assemble a report; entries are sorted and partitioned per time.
    pub fn new(message: &str, engine: &str, graph: &UnrolledGraph, mut edges: Vec<EdgeEntry>) -> Self {
        edges.sort_by(|a, b| (a.edge.time(), &a.edge).cmp(&(b.edge.time(), &b.edge)));
        let partitions = (0..graph.horizon())
            .map(|t| {
                let (flowing, silent): (Vec<_>, Vec<_>) =
                    edges.iter().filter(|x| x.edge.time() == t).partition(|x| x.has_flow);
                Partition {
                    time: t,
                    flowing: flowing.into_iter().map(|x| x.edge.clone()).collect(),
                    silent: silent.into_iter().map(|x| x.edge.clone()).collect(),
                }
            })
            .collect();
        FlowReport {
            message: message.to_string(),
            engine: engine.to_string(),
            horizon: graph.horizon(),
            edges,
            partitions,
            warnings: Vec::new(),
        }
    }

    pub fn entry(&self, e: &EdgeRef) -> Option<&EdgeEntry> {
        self.edges.iter().find(|x| &x.edge == e)
    }

    pub fn has_flow(&self, e: &EdgeRef) -> bool {
        self.entry(e).is_some_and(|x| x.has_flow)
    }

    pub fn flowing(&self) -> BTreeSet<EdgeRef> {
        self.edges.iter().filter(|x| x.has_flow).map(|x| x.edge.clone()).collect()
    }

    pub fn flowing_at(&self, t: usize) -> Vec<EdgeRef> {
        self.partitions.get(t).map(|p| p.flowing.clone()).unwrap_or_default()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_bits_round_trip() {
        let g = UnrolledGraph::complete(&["A"], 1).unwrap();
        let e = EdgeEntry {
            edge: EdgeRef::at("A", "A", 0),
            has_flow: true,
            witness: Some(vec![]),
            quantified: Some(f64::INFINITY),
            p_value: None,
        };
        let r = FlowReport::new("M", "gaussian", &g, vec![e]);
        let text = r.to_json_string();
        assert!(text.contains("\"inf\""));
        let back: FlowReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.partitions[0].flowing.len(), 1);
    }
}
