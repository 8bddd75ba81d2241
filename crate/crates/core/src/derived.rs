//! Derived information, Markov checks and hidden-node alarms.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, NodeRef, UnrolledGraph};
use crate::joint::{InfoMeasure, VarId};

fn edge_vars<J: InfoMeasure + ?Sized>(joint: &J, edges: &[EdgeRef]) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = edges.iter().map(|e| joint.edge_var(e)).collect::<Result<_>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Whether `q` adds nothing about the message once `p` is known.
/// Edges shared by both sets are dropped from `q`.
pub fn is_derived<J: InfoMeasure + ?Sized>(joint: &J, message: &str, q: &[EdgeRef], p: &[EdgeRef]) -> Result<bool> {
    if q.is_empty() || p.is_empty() {
        return Err(Error::query("both edge sets must be nonempty"));
    }
    let m = joint.message_var(message)?;
    let p = edge_vars(joint, p)?;
    let q: Vec<usize> = edge_vars(joint, q)?.into_iter().filter(|v| !p.contains(v)).collect();
    if q.is_empty() {
        return Ok(true);
    }
    joint.independent(&[m], &q, &p)
}

/// Same-time pairs of flowing edges that are each derived from the other.
pub fn redundancy_pairs<J: InfoMeasure + ?Sized>(
    joint: &J,
    message: &str,
    flowing: &[EdgeRef],
) -> Result<Vec<(EdgeRef, EdgeRef)>> {
    let mut edges = flowing.to_vec();
    edges.sort();
    edges.dedup();
    let mut out = Vec::new();
    for (i, a) in edges.iter().enumerate() {
        for b in &edges[i + 1..] {
            if a.time() == b.time()
                && is_derived(joint, message, std::slice::from_ref(a), std::slice::from_ref(b))?
                && is_derived(joint, message, std::slice::from_ref(b), std::slice::from_ref(a))?
            {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    Ok(out)
}

/// Whether `A -> B -> C` is a Markov chain.
pub fn markov_holds<J: InfoMeasure + ?Sized>(joint: &J, a: &[VarId], b: &[VarId], c: &[VarId]) -> Result<bool> {
    let (a, c, b) = joint.resolve_disjoint(a, c, b)?;
    joint.independent(&a, &c, &b)
}

/// Node names hidden at every time.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationMask {
    pub hidden: BTreeSet<String>,
}

impl ObservationMask {
    pub fn new<S: AsRef<str>>(hidden: &[S]) -> Self {
        ObservationMask { hidden: hidden.iter().map(|s| s.as_ref().to_string()).collect() }
    }

    pub fn is_observed(&self, v: &NodeRef) -> bool {
        !self.hidden.contains(&v.name)
    }

    pub fn observes_edge(&self, e: &EdgeRef) -> bool {
        self.is_observed(&e.src) && self.is_observed(&e.dst)
    }

    pub fn observed_edges(&self, graph: &UnrolledGraph, t: usize) -> Vec<EdgeRef> {
        graph.edges_at(t).into_iter().filter(|e| self.observes_edge(e)).collect()
    }

    pub fn observed_nodes(&self, graph: &UnrolledGraph, t: usize) -> Vec<NodeRef> {
        graph.nodes_at(t).into_iter().filter(|v| self.is_observed(v)).collect()
    }

    fn check(&self, graph: &UnrolledGraph) -> Result<()> {
        if let Some(n) = self.hidden.iter().find(|n| !graph.has_name(n)) {
            return Err(Error::invalid(format!("hidden node {n} is not in the graph")));
        }
        if graph.node_names().iter().all(|n| self.hidden.contains(n)) {
            return Err(Error::invalid("every node is hidden"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alarm {
    pub time: usize,
    pub alarm: bool,
    #[serde(with = "crate::report::bits")]
    pub bits: Option<f64>,
}

/// Whether observed transmissions leaving `t + 1` say more about the message
/// than those leaving `t`. An alarm means a hidden node adds information.
pub fn hidden_node_alarm<J: InfoMeasure + ?Sized>(
    joint: &J,
    graph: &UnrolledGraph,
    message: &str,
    mask: &ObservationMask,
    t: usize,
) -> Result<Alarm> {
    mask.check(graph)?;
    if t + 1 >= graph.horizon() {
        return Err(Error::query(format!("no slice after time {t} (horizon {})", graph.horizon())));
    }
    let now = mask.observed_edges(graph, t);
    let next = mask.observed_edges(graph, t + 1);
    if now.is_empty() || next.is_empty() {
        return Err(Error::invalid(format!("the mask hides every edge near time {t}")));
    }
    let m = joint.message_var(message)?;
    let b = edge_vars(joint, &next)?;
    let c = edge_vars(joint, &now)?;
    let alarm = !joint.independent(&[m], &b, &c)?;
    let bits = if alarm { Some(joint.cmi_bits(&[m], &b, &c)?) } else { Some(0.0) };
    Ok(Alarm { time: t, alarm, bits })
}

/// Observed nodes at time `t` whose observed outputs say more about the
/// message than their observed inputs.
pub fn local_markov_alarms<J: InfoMeasure + ?Sized>(
    joint: &J,
    graph: &UnrolledGraph,
    message: &str,
    mask: &ObservationMask,
    t: usize,
) -> Result<Vec<NodeRef>> {
    mask.check(graph)?;
    if t == 0 || t >= graph.horizon() {
        return Err(Error::query(format!("time {t} needs both incoming and outgoing edges")));
    }
    let m = joint.message_var(message)?;
    let mut out = Vec::new();
    for v in mask.observed_nodes(graph, t) {
        let q: Vec<EdgeRef> = graph.outgoing(&v)?.into_iter().filter(|e| mask.observes_edge(e)).collect();
        let p: Vec<EdgeRef> = graph.incoming(&v)?.into_iter().filter(|e| mask.observes_edge(e)).collect();
        if q.is_empty() {
            continue;
        }
        if !joint.independent(&[m], &edge_vars(joint, &q)?, &edge_vars(joint, &p)?)? {
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::joint::enumerate_joint;
    use crate::system::{Law, SystemSpec};

    fn relay_with_hidden_source() -> SystemSpec {
        let g = UnrolledGraph::complete(&["A", "B", "H"], 3).unwrap();
        let mut s = SystemSpec::new(g, Law::fair_bit());
        s.add_input("A")
            .send("A", "H", 0, Expr::Message)
            .send("H", "B", 1, Expr::edge("A", "H", 0))
            .send("B", "B", 2, Expr::edge("H", "B", 1));
        s
    }

    #[test]
    fn derived_basics() {
        let s = relay_with_hidden_source();
        let j = enumerate_joint(&s).unwrap();
        let e: EdgeRef = "A0->H1".parse().unwrap();
        let f: EdgeRef = "H1->B2".parse().unwrap();
        assert!(is_derived(&j, "M", std::slice::from_ref(&e), std::slice::from_ref(&e)).unwrap());
        assert!(is_derived(&j, "M", std::slice::from_ref(&f), std::slice::from_ref(&e)).unwrap());
        assert!(is_derived(&j, "M", &[], std::slice::from_ref(&e)).is_err());
        assert_eq!(redundancy_pairs(&j, "M", &[e, f]).unwrap(), vec![]);
    }

    #[test]
    fn markov_chain_to_itself_fails() {
        let s = relay_with_hidden_source();
        let j = enumerate_joint(&s).unwrap();
        let m = VarId::message("M");
        let e = VarId::Edge("A0->H1".parse().unwrap());
        let f = VarId::Edge("H1->B2".parse().unwrap());
        assert!(markov_holds(&j, std::slice::from_ref(&m), std::slice::from_ref(&e), std::slice::from_ref(&f)).unwrap());
        assert!(markov_holds(&j, std::slice::from_ref(&m), std::slice::from_ref(&f), std::slice::from_ref(&e)).unwrap());
        assert!(!markov_holds(&j, std::slice::from_ref(&m), &[], std::slice::from_ref(&e)).unwrap());
        assert!(markov_holds(&j, std::slice::from_ref(&m), std::slice::from_ref(&m), &[e]).is_err());
    }

    #[test]
    fn hidden_relay_raises_alarm() {
        let s = relay_with_hidden_source();
        let j = enumerate_joint(&s).unwrap();
        let mask = ObservationMask::new(&["H"]);
        let a = hidden_node_alarm(&j, &s.graph, "M", &mask, 1).unwrap();
        assert!(a.alarm);
        assert!((a.bits.unwrap() - 1.0).abs() < 1e-12);
        let none = ObservationMask::default();
        assert!(!hidden_node_alarm(&j, &s.graph, "M", &none, 1).unwrap().alarm);
        assert!(hidden_node_alarm(&j, &s.graph, "M", &ObservationMask::new(&["A", "B", "H"]), 0).is_err());
        assert_eq!(local_markov_alarms(&j, &s.graph, "M", &mask, 2).unwrap(), vec![NodeRef::new("B", 2)]);
        assert_eq!(local_markov_alarms(&j, &s.graph, "M", &none, 2).unwrap(), vec![]);
    }
}
