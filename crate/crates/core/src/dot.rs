//! Graphviz renderings of flow reports and path graphs.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::graph::{NodeRef, UnrolledGraph};
use crate::paths::PathGraph;
use crate::report::FlowReport;

/// Colors assigned to messages in report order.
pub const PALETTE: &[&str] = &["blue", "darkorange", "forestgreen", "red3", "purple", "brown"];

#[derive(Clone, Debug, Default)]
pub struct DotOptions {
    /// Leave out edges that carry no flow for any message.
    pub hide_silent: bool,
    /// Scale pen width by quantified flow where present.
    pub weight_by_bits: bool,
}

fn node_id(v: &NodeRef) -> String {
    format!("\"{v}\"")
}

fn header(out: &mut String, graph: &UnrolledGraph) {
    out.push_str("digraph flow {\n  rankdir=LR;\n  node [shape=circle, fontsize=10];\n");
    for t in 0..=graph.horizon() {
        let _ = write!(out, "  {{ rank=same;");
        for v in graph.nodes_at(t) {
            let _ = write!(out, " {}", node_id(&v));
        }
        out.push_str(" }\n");
    }
}

fn penwidth(bits: Option<f64>) -> f64 {
    match bits {
        Some(b) if b.is_infinite() => 5.0,
        Some(b) => 1.0 + b.clamp(0.0, 4.0),
        None => 2.0,
    }
}

/// One colored edge per flowing message; silent edges in light gray.
pub fn report_to_dot(graph: &UnrolledGraph, reports: &[FlowReport], opts: &DotOptions) -> String {
    let mut out = String::new();
    header(&mut out, graph);
    for (k, r) in reports.iter().enumerate() {
        let _ = writeln!(
            out,
            "  \"legend {}\" [shape=plaintext, label=\"{}\", fontcolor={}];",
            r.message,
            r.message,
            PALETTE[k % PALETTE.len()]
        );
    }
    for e in graph.edges() {
        let mut any = false;
        for (k, r) in reports.iter().enumerate() {
            let Some(entry) = r.entry(&e).filter(|x| x.has_flow) else {
                continue;
            };
            any = true;
            let w = if opts.weight_by_bits { penwidth(entry.quantified) } else { 2.0 };
            let _ = writeln!(
                out,
                "  {} -> {} [color={}, penwidth={w:.2}];",
                node_id(&e.src),
                node_id(&e.dst),
                PALETTE[k % PALETTE.len()]
            );
        }
        if !any && !opts.hide_silent {
            let _ = writeln!(out, "  {} -> {} [color=gray85];", node_id(&e.src), node_id(&e.dst));
        }
    }
    out.push_str("}\n");
    out
}

/// The path subgraph on top of the full graph; root inputs are boxed and the
/// target doubled.
pub fn paths_to_dot(graph: &UnrolledGraph, h: &PathGraph) -> String {
    let mut out = String::new();
    header(&mut out, graph);
    for v in &h.root_inputs {
        let _ = writeln!(out, "  {} [shape=box];", node_id(v));
    }
    let _ = writeln!(out, "  {} [shape=doublecircle];", node_id(&h.target));
    let on: BTreeSet<_> = h.edges.iter().collect();
    for e in graph.edges() {
        if on.contains(&e) {
            let _ = writeln!(out, "  {} -> {} [color=blue, penwidth=2.00];", node_id(&e.src), node_id(&e.dst));
        } else {
            let _ = writeln!(out, "  {} -> {} [color=gray85];", node_id(&e.src), node_id(&e.dst));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::EdgeEntry;
    use crate::EdgeRef;

    #[test]
    fn flowing_edges_are_colored() {
        let g = UnrolledGraph::complete(&["A", "B"], 1).unwrap();
        let entries = g
            .edges()
            .into_iter()
            .map(|e| EdgeEntry { has_flow: e == EdgeRef::at("A", "B", 0), edge: e, witness: None, quantified: None, p_value: None })
            .collect();
        let r = FlowReport::new("M", "discrete", &g, entries);
        let text = report_to_dot(&g, std::slice::from_ref(&r), &DotOptions::default());
        assert!(text.contains("\"A0\" -> \"B1\" [color=blue"));
        assert!(text.contains("\"A0\" -> \"A1\" [color=gray85]"));
        let hidden = report_to_dot(&g, &[r], &DotOptions { hide_silent: true, ..Default::default() });
        assert!(!hidden.contains("gray85"));
    }
}
