//! Forward propagation of one realization of the message and node noise.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::{Compiled, Inputs};
use crate::graph::{EdgeRef, NodeRef};
use crate::system::SystemSpec;
use crate::value::Value;

struct Step {
    edge: usize,
    expr: Compiled,
    noise: Option<usize>,
}

/// A compiled system. Edge values are indexed in canonical edge order.
pub struct Simulator {
    edges: Vec<EdgeRef>,
    steps: Vec<Step>,
    noise_nodes: Vec<NodeRef>,
    views: Vec<(String, Compiled)>,
}

impl Simulator {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        spec.validate()?;
        let edges = spec.graph.edges();
        let slot_of: HashMap<&EdgeRef, usize> = edges.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let slot = |e: &EdgeRef| {
            slot_of
                .get(e)
                .copied()
                .ok_or_else(|| Error::UnknownVariable(e.to_string()))
        };
        let noise_nodes: Vec<NodeRef> = spec.noise.keys().cloned().collect();
        let mut steps = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            if let Some(expr) = spec.function(e) {
                steps.push(Step {
                    edge: i,
                    expr: Compiled::new(expr, &slot)?,
                    noise: noise_nodes.binary_search(&e.src).ok(),
                });
            }
        }
        steps.sort_by_key(|s| (edges[s.edge].time(), s.edge));
        let views = spec
            .message_views()
            .into_iter()
            .map(|(name, e)| Ok((name, Compiled::new(&e, &slot)?)))
            .collect::<Result<_>>()?;
        Ok(Simulator { edges, steps, noise_nodes, views })
    }

    pub fn edges(&self) -> &[EdgeRef] {
        &self.edges
    }

    /// Nodes with intrinsic randomness, in the order `propagate` expects.
    pub fn noise_nodes(&self) -> &[NodeRef] {
        &self.noise_nodes
    }

    pub fn message_names(&self) -> Vec<&str> {
        self.views.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Transmissions on every edge for the given root message and noise draw.
    pub fn propagate(&self, message: &Value, noise: &[Value]) -> Result<Vec<Value>> {
        debug_assert_eq!(noise.len(), self.noise_nodes.len());
        let zero = Value::zero();
        let mut values = vec![Value::zero(); self.edges.len()];
        for step in &self.steps {
            let w = step.noise.map_or(&zero, |i| &noise[i]);
            let v = step
                .expr
                .eval(&Inputs { slots: &values, noise: w, message })
                .map_err(|e| Error::Eval(format!("on {}: {e}", self.edges[step.edge])))?;
            values[step.edge] = v;
        }
        Ok(values)
    }

    /// Values of the named messages given the root message and all edges.
    pub fn messages(&self, message: &Value, edges: &[Value]) -> Result<Vec<Value>> {
        let zero = Value::zero();
        self.views
            .iter()
            .map(|(name, c)| {
                c.eval(&Inputs { slots: edges, noise: &zero, message })
                    .map_err(|e| Error::Eval(format!("message {name}: {e}")))
            })
            .collect()
    }
}
