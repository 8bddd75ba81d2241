//! Systems with a hidden node `H`.

use super::{Fixture, Provenance::*};
use crate::expr::Expr;
use crate::graph::UnrolledGraph;
use crate::system::{Law, SystemSpec};
use crate::value::Value;

fn e(s: &str, d: &str, t: usize) -> Expr {
    Expr::edge(s, d, t)
}

fn hide(mut f: Fixture) -> Fixture {
    f.hidden = vec!["H".to_string()];
    f
}

/// The key that unmasks the message travels through `H`.
pub(super) fn relayed_key() -> Fixture {
    let g = UnrolledGraph::complete(&["A", "B", "C", "H"], 3).expect("valid graph");
    let mut s = SystemSpec::new(g, Law::fair_bit());
    s.add_input("A")
        .set_noise("C", 0, Law::fair_bit())
        .send("A", "A", 0, Expr::Message)
        .send("C", "A", 0, Expr::Noise)
        .send("C", "H", 0, Expr::Noise)
        .send("A", "B", 1, Expr::xor(vec![e("A", "A", 0), e("C", "A", 0)]))
        .send("H", "B", 1, e("C", "H", 0))
        .send("B", "B", 2, Expr::xor(vec![e("A", "B", 1), e("H", "B", 1)]));
    hide(Fixture::new("hidden-basic", "the unmasking key is relayed by a hidden node", s)).flows(
        "M",
        Derived,
        &["A0->A1", "A1->B2", "H1->B2", "B2->B3"],
    )
}

/// `H` generates the key itself.
pub(super) fn hidden_key_source() -> Fixture {
    let g = UnrolledGraph::complete(&["A", "B", "H"], 3).expect("valid graph");
    let mut s = SystemSpec::new(g, Law::fair_bit());
    s.add_input("A")
        .set_noise("H", 0, Law::fair_bit())
        .send("A", "A", 0, Expr::Message)
        .send("H", "A", 0, Expr::Noise)
        .send("H", "H", 0, Expr::Noise)
        .send("A", "B", 1, Expr::xor(vec![e("A", "A", 0), e("H", "A", 0)]))
        .send("H", "B", 1, e("H", "H", 0))
        .send("B", "B", 2, Expr::xor(vec![e("A", "B", 1), e("H", "B", 1)]));
    hide(Fixture::new("hidden-source", "a hidden node generates the masking key", s)).flows(
        "M",
        Derived,
        &["A0->A1", "A1->B2", "H1->B2", "B2->B3"],
    )
}

/// `H` carries half of the message, which the receiver ignores.
pub(super) fn ignored_relay() -> Fixture {
    let g = UnrolledGraph::complete(&["A", "H"], 3).expect("valid graph");
    let pairs = (0..4).map(|i| Value::tuple(vec![Value::int(i / 2), Value::int(i % 2)])).collect();
    let mut s = SystemSpec::new(g, Law::uniform(pairs));
    s.add_input("A")
        .send("A", "H", 0, Expr::select(0, Expr::Message))
        .send("A", "A", 0, Expr::select(1, Expr::Message))
        .send("H", "A", 1, e("A", "H", 0))
        .send("A", "A", 1, e("A", "A", 0))
        .send("A", "A", 2, e("A", "A", 1));
    hide(Fixture::new(
        "hidden-ignored",
        "a relevant hidden node whose transmission is ignored raises no alarm",
        s,
    ))
    .flows("M", Derived, &["A0->A1", "A0->H1", "A1->A2", "H1->A2", "A2->A3"])
}

/// `A2` receives the message from `H` and a masked copy from `A1`. Without
/// `masked_key`, the key bypasses `A2`; with it, the key reaches `A2` too.
pub(super) fn redundant(masked_key: bool) -> Fixture {
    let g = UnrolledGraph::complete(&["A", "C", "H"], 3).expect("valid graph");
    let mut s = SystemSpec::new(g, Law::fair_bit());
    s.add_input("A")
        .set_noise("C", 0, Law::fair_bit())
        .send("A", "A", 0, Expr::Message)
        .send("A", "H", 0, Expr::Message)
        .send("C", "A", 0, Expr::Noise)
        .send("C", "C", 0, Expr::Noise)
        .send("A", "A", 1, Expr::xor(vec![e("A", "A", 0), e("C", "A", 0)]))
        .send("H", "A", 1, e("A", "H", 0))
        .send("A", "A", 2, e("H", "A", 1));
    let (name, summary, key) = if masked_key {
        s.send("C", "A", 1, e("C", "C", 0));
        ("hidden-redundant-b", "the hidden message copy is masked at every check", "C1->A2")
    } else {
        s.send("C", "C", 1, e("C", "C", 0));
        ("hidden-redundant-a", "only the local check at the receiver sees the hidden copy", "C1->C2")
    };
    hide(Fixture::new(name, summary, s)).flows(
        "M",
        Derived,
        &["A0->A1", "A0->H1", "A1->A2", key, "H1->A2", "A2->A3"],
    )
}
