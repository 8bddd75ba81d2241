//! Worked systems with their expected flows and paths.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, NodeRef};
use crate::system::SystemSpec;

mod canonical;
mod counterexamples;
mod hidden;

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Stated outright in the worked example.
    Stated,
    /// Worked out by hand from the system's transmissions.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedFlow {
    pub edges: BTreeSet<EdgeRef>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedPaths {
    pub message: String,
    pub target: NodeRef,
    pub paths: Vec<Vec<NodeRef>>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub summary: String,
    pub spec: SystemSpec,
    /// Expected flowing edges per message.
    pub expected_flow: BTreeMap<String, ExpectedFlow>,
    pub expected_paths: Vec<ExpectedPaths>,
    /// Friendly node names, e.g. `Y2-output`.
    pub aliases: BTreeMap<String, NodeRef>,
    /// Nodes meant to be hidden when checking for hidden-node alarms.
    pub hidden: Vec<String>,
}

impl Fixture {
    fn new(name: &str, summary: &str, spec: SystemSpec) -> Self {
        Fixture {
            name: name.to_string(),
            summary: summary.to_string(),
            spec,
            expected_flow: BTreeMap::new(),
            expected_paths: Vec::new(),
            aliases: BTreeMap::new(),
            hidden: Vec::new(),
        }
    }

    fn flows(mut self, message: &str, provenance: Provenance, edges: &[&str]) -> Self {
        let edges = edges.iter().map(|s| s.parse().expect("fixture edge label")).collect();
        self.expected_flow.insert(message.to_string(), ExpectedFlow { edges, provenance });
        self
    }

    fn paths(mut self, message: &str, target: &str, provenance: Provenance, paths: &[&[&str]]) -> Self {
        self.expected_paths.push(ExpectedPaths {
            message: message.to_string(),
            target: target.parse().expect("fixture node label"),
            paths: paths
                .iter()
                .map(|p| p.iter().map(|s| s.parse().expect("fixture node label")).collect())
                .collect(),
            provenance,
        });
        self
    }

    fn alias(mut self, name: &str, node: &str) -> Self {
        self.aliases.insert(name.to_string(), node.parse().expect("fixture node label"));
        self
    }

    /// Resolve an alias or a plain node label.
    pub fn node(&self, label: &str) -> Result<NodeRef> {
        match self.aliases.get(label) {
            Some(v) => Ok(v.clone()),
            None => label.parse(),
        }
    }
}

/// External parameter of the output-defined message system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    Zero,
    One,
    /// A fair coin drawn at the selector node.
    Random,
}

#[derive(Clone, Debug)]
pub struct FixtureParams {
    /// Noise variance for `sk`.
    pub noise_variance: f64,
    /// Iterations for `sk`.
    pub iterations: usize,
    pub selector: Selector,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams { noise_variance: 1.0, iterations: 3, selector: Selector::One }
    }
}

pub const NAMES: &[&str] = &[
    "ce1",
    "ce2",
    "ce3",
    "mult-msg",
    "butterfly",
    "fft-even",
    "fft-phase",
    "sk",
    "output-msg",
    "hidden-basic",
    "hidden-source",
    "hidden-ignored",
    "hidden-redundant-a",
    "hidden-redundant-b",
];

pub fn build(name: &str) -> Result<Fixture> {
    build_with(name, &FixtureParams::default())
}

pub fn build_with(name: &str, p: &FixtureParams) -> Result<Fixture> {
    let f = match name {
        "ce1" => counterexamples::ce1(),
        "ce2" => counterexamples::ce2(),
        "ce3" => counterexamples::ce3(),
        "mult-msg" => canonical::multiple_messages(),
        "butterfly" => canonical::butterfly(),
        "fft-even" => canonical::fft_even(),
        "fft-phase" => canonical::fft_phase(),
        "sk" => canonical::feedback_channel(p.noise_variance, p.iterations)?,
        "output-msg" => canonical::output_message(p.selector),
        "hidden-basic" => hidden::relayed_key(),
        "hidden-source" => hidden::hidden_key_source(),
        "hidden-ignored" => hidden::ignored_relay(),
        "hidden-redundant-a" => hidden::redundant(false),
        "hidden-redundant-b" => hidden::redundant(true),
        other => {
            return Err(Error::query(format!("unknown fixture {other:?}; known: {}", NAMES.join(", "))))
        }
    };
    f.spec.validate()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_builds_and_references_real_edges() {
        for name in NAMES {
            let f = build(name).unwrap();
            for (m, flow) in &f.expected_flow {
                assert!(f.spec.message_names().contains(m), "{name}: {m}");
                for e in &flow.edges {
                    assert!(f.spec.graph.contains_edge(e), "{name}: {e}");
                }
            }
            for v in f.aliases.values() {
                assert!(f.spec.graph.contains_node(v), "{name}: {v}");
            }
            let back = SystemSpec::from_json_str(&f.spec.to_json_string()).unwrap();
            assert_eq!(back, f.spec, "{name}");
        }
        assert!(build("nope").is_err());
        assert!(build_with("sk", &FixtureParams { noise_variance: -1.0, ..Default::default() }).is_err());
    }
}
