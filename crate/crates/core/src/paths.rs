//! Information paths from input nodes to an output node.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, NodeRef, UnrolledGraph};
use crate::report::FlowReport;

/// Subgraph of every information path that ends at `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathGraph {
    pub nodes: BTreeSet<NodeRef>,
    pub edges: BTreeSet<EdgeRef>,
    /// Input nodes that reach the target.
    pub root_inputs: BTreeSet<NodeRef>,
    pub target: NodeRef,
}

/// Work counters from one traversal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Traversal {
    pub node_visits: usize,
    pub edge_inspections: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Valid,
    Invalid,
}

struct Frame {
    node: NodeRef,
    incoming: Vec<EdgeRef>,
    next: usize,
    /// Edge whose source is being resolved by the frame above.
    pending: Option<EdgeRef>,
}

/// Depth-first search backwards from `target` over flow edges. A node is
/// valid when it is an input, or when a valid node feeds it over a flow
/// edge. Each node is expanded at most once.
pub fn find_info_paths(
    report: &FlowReport,
    graph: &UnrolledGraph,
    target: &NodeRef,
    inputs: &BTreeSet<NodeRef>,
) -> Result<(PathGraph, Traversal)> {
    if !graph.contains_node(target) {
        return Err(Error::query(format!("target {target} is not in the graph")));
    }
    if target.time == 0 {
        return Err(Error::query("the target must be at time 1 or later"));
    }
    if let Some(v) = inputs.iter().find(|v| v.time != 0 || !graph.contains_node(v)) {
        return Err(Error::query(format!("input {v} must be a time-0 node of the graph")));
    }
    if target.time > report.horizon {
        return Err(Error::query(format!("report ends at time {}, before {target}", report.horizon)));
    }

    let mut marks: BTreeMap<NodeRef, Mark> = BTreeMap::new();
    let mut h = PathGraph {
        nodes: BTreeSet::new(),
        edges: BTreeSet::new(),
        root_inputs: BTreeSet::new(),
        target: target.clone(),
    };
    let mut count = Traversal::default();

    let mut stack = vec![open(graph, target, &mut count)?];
    while let Some(top) = stack.last_mut() {
        if let Some(e) = top.pending.take() {
            if marks.get(&e.src) == Some(&Mark::Valid) {
                marks.insert(top.node.clone(), Mark::Valid);
                h.nodes.insert(top.node.clone());
                h.edges.insert(e);
            }
        }
        if top.incoming.is_empty() {
            let v = top.node.clone();
            stack.pop();
            if !inputs.contains(&v) {
                return Err(Error::ModelViolationAtInput(v));
            }
            marks.insert(v.clone(), Mark::Valid);
            h.nodes.insert(v.clone());
            h.root_inputs.insert(v);
            continue;
        }
        if top.next == top.incoming.len() {
            let v = top.node.clone();
            stack.pop();
            marks.entry(v).or_insert(Mark::Invalid);
            continue;
        }
        let e = top.incoming[top.next].clone();
        top.next += 1;
        count.edge_inspections += 1;
        if !report.has_flow(&e) {
            continue;
        }
        match marks.get(&e.src) {
            Some(Mark::Valid) => {
                marks.insert(top.node.clone(), Mark::Valid);
                h.nodes.insert(top.node.clone());
                h.edges.insert(e);
            }
            Some(Mark::Invalid) => {}
            None => {
                top.pending = Some(e.clone());
                let frame = open(graph, &e.src, &mut count)?;
                stack.push(frame);
            }
        }
    }

    if marks.get(target) != Some(&Mark::Valid) {
        return Err(Error::NoPathFound(target.clone()));
    }
    Ok((h, count))
}

fn open(graph: &UnrolledGraph, v: &NodeRef, count: &mut Traversal) -> Result<Frame> {
    count.node_visits += 1;
    Ok(Frame { node: v.clone(), incoming: graph.incoming(v)?, next: 0, pending: None })
}

/// A cut with no flow across it separating `a` from `b`, or `None` when
/// some information path joins them.
pub fn zero_information_cut(
    report: &FlowReport,
    graph: &UnrolledGraph,
    a: &BTreeSet<NodeRef>,
    b: &BTreeSet<NodeRef>,
) -> Result<Option<(BTreeSet<NodeRef>, BTreeSet<NodeRef>)>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::query("both node sets must be nonempty"));
    }
    if !a.is_disjoint(b) {
        return Err(Error::query("node sets overlap"));
    }
    if let Some(v) = a.iter().chain(b).find(|v| !graph.contains_node(v)) {
        return Err(Error::query(format!("node {v} is not in the graph")));
    }
    let mut reach = a.clone();
    let mut frontier: Vec<NodeRef> = a.iter().cloned().collect();
    while let Some(v) = frontier.pop() {
        for e in graph.outgoing(&v)? {
            if report.has_flow(&e) && reach.insert(e.dst.clone()) {
                frontier.push(e.dst);
            }
        }
    }
    if !reach.is_disjoint(b) {
        return Ok(None);
    }
    let sink = graph.nodes().into_iter().filter(|v| !reach.contains(v)).collect();
    Ok(Some((reach, sink)))
}

/// Edges from `src` to `sink`; all of them are silent for a cut returned by
/// [`zero_information_cut`].
pub fn cut_edges(graph: &UnrolledGraph, src: &BTreeSet<NodeRef>) -> Vec<EdgeRef> {
    src.iter()
        .flat_map(|v| graph.outgoing(v).unwrap_or_default())
        .filter(|e| !src.contains(&e.dst))
        .collect()
}

/// Explicit source-to-target paths of `h` in lexicographic order, at most
/// `limit` of them. The flag is set when more paths exist.
pub fn enumerate_paths(h: &PathGraph, limit: usize) -> (Vec<Vec<NodeRef>>, bool) {
    let mut succ: BTreeMap<&NodeRef, Vec<&NodeRef>> = BTreeMap::new();
    for e in &h.edges {
        succ.entry(&e.src).or_default().push(&e.dst);
    }
    let mut out = Vec::new();
    for s in &h.root_inputs {
        let mut path = vec![s];
        let mut iters = vec![0usize];
        while let Some(i) = iters.last_mut() {
            let v = *path.last().expect("path tracks iters");
            if *v == h.target {
                if out.len() == limit {
                    return (out, true);
                }
                out.push(path.iter().map(|&n| n.clone()).collect());
                path.pop();
                iters.pop();
                continue;
            }
            let next = succ.get(v).and_then(|s| s.get(*i));
            match next {
                Some(&n) => {
                    *i += 1;
                    path.push(n);
                    iters.push(0);
                }
                None => {
                    path.pop();
                    iters.pop();
                }
            }
        }
    }
    (out, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::EdgeEntry;

    fn report(g: &UnrolledGraph, flow: &[&str]) -> FlowReport {
        let flow: BTreeSet<EdgeRef> = flow.iter().map(|s| s.parse().unwrap()).collect();
        let entries = g
            .edges()
            .into_iter()
            .map(|e| EdgeEntry { has_flow: flow.contains(&e), edge: e, witness: None, quantified: None, p_value: None })
            .collect();
        FlowReport::new("M", "test", g, entries)
    }

    fn n(s: &str) -> NodeRef {
        s.parse().unwrap()
    }

    #[test]
    fn two_branches() {
        let g = UnrolledGraph::complete(&["A", "B", "C"], 2).unwrap();
        let r = report(&g, &["A0->A1", "A0->B1", "A1->C2", "B1->C2", "C0->C1"]);
        let inputs = BTreeSet::from([n("A0")]);
        let (h, c) = find_info_paths(&r, &g, &n("C2"), &inputs).unwrap();
        assert_eq!(h.edges.len(), 4);
        assert!(!h.nodes.contains(&n("C1")));
        let (paths, truncated) = enumerate_paths(&h, 10);
        assert!(!truncated);
        assert_eq!(
            paths,
            vec![vec![n("A0"), n("A1"), n("C2")], vec![n("A0"), n("B1"), n("C2")]]
        );
        assert_eq!(enumerate_paths(&h, 1), (vec![paths[0].clone()], true));
        assert!(c.node_visits <= 3 * 2);
        assert!(c.edge_inspections <= 9 * 2);
    }

    #[test]
    fn single_edge() {
        let g = UnrolledGraph::complete(&["A", "B"], 1).unwrap();
        let r = report(&g, &["A0->B1"]);
        let (h, _) = find_info_paths(&r, &g, &n("B1"), &BTreeSet::from([n("A0")])).unwrap();
        assert_eq!(enumerate_paths(&h, 5).0, vec![vec![n("A0"), n("B1")]]);
    }

    #[test]
    fn errors_are_distinct() {
        let g = UnrolledGraph::complete(&["A", "B"], 2).unwrap();
        let silent = report(&g, &[]);
        let inputs = BTreeSet::from([n("A0")]);
        assert!(matches!(find_info_paths(&silent, &g, &n("B2"), &inputs), Err(Error::NoPathFound(_))));
        let rogue = report(&g, &["B0->B1", "B1->B2"]);
        assert!(matches!(
            find_info_paths(&rogue, &g, &n("B2"), &inputs),
            Err(Error::ModelViolationAtInput(v)) if v == n("B0")
        ));
        assert!(find_info_paths(&silent, &g, &n("B0"), &inputs).is_err());
    }

    #[test]
    fn cut_matches_reachability() {
        let g = UnrolledGraph::complete(&["A", "B"], 2).unwrap();
        let r = report(&g, &["A0->A1"]);
        let (src, sink) = zero_information_cut(&r, &g, &BTreeSet::from([n("A0")]), &BTreeSet::from([n("B2")]))
            .unwrap()
            .unwrap();
        assert_eq!(src, BTreeSet::from([n("A0"), n("A1")]));
        assert_eq!(src.len() + sink.len(), 6);
        assert!(cut_edges(&g, &src).iter().all(|e| !r.has_flow(e)));
        assert!(zero_information_cut(&r, &g, &BTreeSet::from([n("A0")]), &BTreeSet::from([n("A1")]))
            .unwrap()
            .is_none());
        assert!(zero_information_cut(&r, &g, &BTreeSet::new(), &BTreeSet::new()).is_err());
        assert!(zero_information_cut(&r, &g, &BTreeSet::from([n("A0")]), &BTreeSet::from([n("A0")])).is_err());
    }
}
