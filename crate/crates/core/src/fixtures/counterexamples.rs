//! The three systems that rule out the simpler flow definitions.

use super::{Fixture, Provenance::*};
use crate::expr::Expr;
use crate::graph::UnrolledGraph;
use crate::system::{Law, SystemSpec};

fn e(s: &str, d: &str, t: usize) -> Expr {
    Expr::edge(s, d, t)
}

/// A key from `C` masks the message; `B` unmasks it.
pub(super) fn ce1() -> Fixture {
    let g = UnrolledGraph::complete(&["A", "B", "C"], 3).expect("valid graph");
    let mut s = SystemSpec::new(g, Law::fair_bit());
    s.add_input("A")
        .set_noise("C", 0, Law::fair_bit())
        .send("A", "A", 0, Expr::Message)
        .send("C", "A", 0, Expr::Noise)
        .send("C", "C", 0, Expr::Noise)
        .send("A", "B", 1, Expr::xor(vec![e("A", "A", 0), e("C", "A", 0)]))
        .send("C", "B", 1, e("C", "C", 0))
        .send("B", "B", 2, Expr::xor(vec![e("A", "B", 1), e("C", "B", 1)]));
    Fixture::new("ce1", "one-time pad: no single input of B2 depends on M", s).flows(
        "M",
        Stated,
        &["A0->A1", "A1->B2", "C1->B2", "B2->B3"],
    )
}

/// Two keys, so conditioning on one other edge is not enough.
pub(super) fn ce2() -> Fixture {
    let g = UnrolledGraph::complete(&["A", "B", "C", "D"], 3).expect("valid graph");
    let mut s = SystemSpec::new(g, Law::fair_bit());
    s.add_input("A")
        .set_noise("C", 0, Law::fair_bit())
        .set_noise("D", 0, Law::fair_bit())
        .send("A", "A", 0, Expr::Message)
        .send("C", "A", 0, Expr::Noise)
        .send("C", "C", 0, Expr::Noise)
        .send("D", "A", 0, Expr::Noise)
        .send("D", "D", 0, Expr::Noise)
        .send("A", "B", 1, Expr::xor(vec![e("A", "A", 0), e("C", "A", 0), e("D", "A", 0)]))
        .send("C", "B", 1, e("C", "C", 0))
        .send("D", "B", 1, e("D", "D", 0))
        .send("B", "B", 2, Expr::xor(vec![e("A", "B", 1), e("C", "B", 1), e("D", "B", 1)]));
    Fixture::new("ce2", "two independent keys: single-edge conditioning misses the flow", s).flows(
        "M",
        Stated,
        &["A0->A1", "A1->B2", "C1->B2", "D1->B2", "B2->B3"],
    )
}

/// A redundant masked copy, so conditioning on all other edges hides it.
pub(super) fn ce3() -> Fixture {
    let g = UnrolledGraph::complete(&["A", "B", "C", "D"], 3).expect("valid graph");
    let mut s = SystemSpec::new(g, Law::fair_bit());
    s.add_input("A")
        .set_noise("C", 0, Law::fair_bit())
        .send("A", "A", 0, Expr::Message)
        .send("A", "D", 0, Expr::Message)
        .send("C", "A", 0, Expr::Noise)
        .send("C", "D", 0, Expr::Noise)
        .send("C", "C", 0, Expr::Noise)
        .send("A", "B", 1, Expr::xor(vec![e("A", "A", 0), e("C", "A", 0)]))
        .send("D", "B", 1, Expr::xor(vec![e("A", "D", 0), e("C", "D", 0)]))
        .send("C", "B", 1, e("C", "C", 0))
        .send("C", "C", 1, e("C", "C", 0))
        .send("B", "B", 2, Expr::xor(vec![e("A", "B", 1), e("C", "B", 1)]));
    Fixture::new("ce3", "redundant masked path: conditioning on every other edge misses the flow", s).flows(
        "M",
        Stated,
        &["A0->A1", "A0->D1", "A1->B2", "C1->B2", "C1->C2", "D1->B2", "B2->B3"],
    )
}
