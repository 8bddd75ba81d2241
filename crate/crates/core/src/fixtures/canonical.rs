//! Network coding, FFT, feedback channel and output-defined message systems.

use num_rational::Rational64;

use super::{Fixture, Provenance::*, Selector};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::graph::UnrolledGraph;
use crate::system::{Law, SystemSpec};
use crate::value::Value;

fn e(s: &str, d: &str, t: usize) -> Expr {
    Expr::edge(s, d, t)
}

fn bit_pairs() -> Law {
    Law::uniform((0..4).map(|i| Value::tuple(vec![Value::int(i / 2), Value::int(i % 2)])).collect())
}

/// Two receivers each get one message directly and the XOR through the
/// shared middle link.
pub(super) fn butterfly() -> Fixture {
    let g = UnrolledGraph::complete(&["A", "B", "C"], 5).expect("valid graph");
    let mut s = SystemSpec::new(g, bit_pairs());
    let decode = |own: &str, own_first: bool| {
        let mine = e(own, own, 3);
        let other = Expr::xor(vec![e(own, own, 3), e("C", own, 3)]);
        if own_first {
            Expr::Concat(vec![mine, other])
        } else {
            Expr::Concat(vec![other, mine])
        }
    };
    s.add_input("C")
        .add_message("M1", Expr::select(0, Expr::Message))
        .add_message("M2", Expr::select(1, Expr::Message))
        .send("C", "A", 0, Expr::select(0, Expr::Message))
        .send("C", "B", 0, Expr::select(1, Expr::Message))
        .send("A", "A", 1, e("C", "A", 0))
        .send("A", "C", 1, e("C", "A", 0))
        .send("B", "B", 1, e("C", "B", 0))
        .send("B", "C", 1, e("C", "B", 0))
        .send("A", "A", 2, e("A", "A", 1))
        .send("B", "B", 2, e("B", "B", 1))
        .send("C", "C", 2, Expr::xor(vec![e("A", "C", 1), e("B", "C", 1)]))
        .send("A", "A", 3, e("A", "A", 2))
        .send("B", "B", 3, e("B", "B", 2))
        .send("C", "A", 3, e("C", "C", 2))
        .send("C", "B", 3, e("C", "C", 2))
        .send("A", "A", 4, decode("A", true))
        .send("B", "B", 4, decode("B", false));
    let after_mixing = [
        "A2->A3", "B2->B3", "C2->C3", "A3->A4", "B3->B4", "C3->A4", "C3->B4", "A4->A5", "B4->B5",
    ];
    let m1: Vec<&str> = ["C0->A1", "A1->A2", "A1->C2"].into_iter().chain(after_mixing).collect();
    let m2: Vec<&str> = ["C0->B1", "B1->B2", "B1->C2"].into_iter().chain(after_mixing).collect();
    Fixture::new("butterfly", "network-coding butterfly with two independent bits", s)
        .flows("M1", Stated, &m1)
        .flows("M2", Stated, &m2)
        .paths("M1", "A4", Stated, &[&["C0", "A1", "A2", "A3", "A4"], &["C0", "A1", "C2", "C3", "A4"]])
        .paths("M2", "A4", Stated, &[&["C0", "B1", "C2", "C3", "A4"]])
        .paths("M1", "B4", Stated, &[&["C0", "A1", "C2", "C3", "B4"]])
}

fn j() -> Expr {
    Expr::complex(Rational64::from_integer(0), Rational64::from_integer(1))
}

/// Radix-2 4-point FFT. Rows `A..D` hold the bit-reversed inputs
/// `Y0, Y2, Y1, Y3`; the outputs leave `A2..D2` as coefficients 0, 1, 2, 3.
fn fft(name: &str, summary: &str, inputs: [Expr; 4]) -> Fixture {
    let g = UnrolledGraph::complete(&["A", "B", "C", "D"], 3).expect("valid graph");
    let mut s = SystemSpec::new(g, Law::fair_bit());
    let rows = ["A", "B", "C", "D"];
    for (r, y) in rows.iter().zip(inputs) {
        s.add_input(r);
        let partner = match *r {
            "A" => "B",
            "B" => "A",
            "C" => "D",
            _ => "C",
        };
        s.send(r, r, 0, y.clone()).send(r, partner, 0, y);
    }
    let sum = |a: &str, b: &str, at: &str| Expr::add(vec![e(a, at, 0), e(b, at, 0)]);
    let diff = |a: &str, b: &str, at: &str| Expr::sub(e(a, at, 0), e(b, at, 0));
    s.send("A", "A", 1, sum("A", "B", "A"))
        .send("A", "C", 1, sum("A", "B", "A"))
        .send("B", "B", 1, diff("A", "B", "B"))
        .send("B", "D", 1, diff("A", "B", "B"))
        .send("C", "A", 1, sum("C", "D", "C"))
        .send("C", "C", 1, sum("C", "D", "C"))
        .send("D", "B", 1, diff("C", "D", "D"))
        .send("D", "D", 1, diff("C", "D", "D"))
        .send("A", "A", 2, Expr::add(vec![e("A", "A", 1), e("C", "A", 1)]))
        .send("C", "C", 2, Expr::sub(e("A", "C", 1), e("C", "C", 1)))
        .send("B", "B", 2, Expr::sub(e("B", "B", 1), Expr::mul(vec![j(), e("D", "B", 1)])))
        .send("D", "D", 2, Expr::add(vec![e("B", "D", 1), Expr::mul(vec![j(), e("D", "D", 1)])]));
    let mut f = Fixture::new(name, summary, s);
    for (k, node) in ["A", "C", "B", "D"].iter().enumerate() {
        f = f.alias(&format!("Y{k}-input"), &format!("{node}0"));
    }
    for (k, node) in rows.iter().enumerate() {
        f = f.alias(&format!("Y{k}-output"), &format!("{node}3"));
    }
    f
}

/// The message picks between the zero signal and one with `Y0 = Y2 = 1`.
pub(super) fn fft_even() -> Fixture {
    let zero = Expr::int(0);
    fft(
        "fft-even",
        "4-point FFT; the message lives in the even part of the input",
        [Expr::Message, Expr::Message, zero.clone(), zero],
    )
    .flows(
        "M",
        Stated,
        &["A0->A1", "A0->B1", "B0->A1", "B0->B1", "A1->A2", "A1->C2", "A2->A3", "C2->C3"],
    )
}

/// The message picks between a flat signal and its one-step phase ramp,
/// both scaled by 1/4: `Y_i = (1 + M (j^i - 1)) / 4`.
pub(super) fn fft_phase() -> Fixture {
    let quarter = |re: i64, im: i64| Expr::complex(Rational64::new(re, 4), Rational64::new(im, 4));
    let input = |i: usize| {
        let (re, im) = [(1, 0), (0, 1), (-1, 0), (0, -1)][i];
        Expr::add(vec![quarter(1, 0), Expr::mul(vec![Expr::Message, quarter(re - 1, im)])])
    };
    fft(
        "fft-phase",
        "4-point FFT; the message shifts the output spike from bin 0 to bin 1",
        [input(0), input(2), input(1), input(3)],
    )
    .flows(
        "M",
        Stated,
        &[
            "B0->A1", "B0->B1", "C0->C1", "C0->D1", "D0->C1", "D0->D1", "A1->A2", "A1->C2", "B1->B2", "B1->D2",
            "C1->A2", "C1->C2", "D1->B2", "D1->D2", "A2->A3", "B2->B3",
        ],
    )
}

/// Feedback channel: the sender transmits the receiver's current error, the
/// receiver averages the noisy observations and feeds its estimate back.
/// Iteration `i` runs from time `2i - 2` to `2i`.
pub(super) fn feedback_channel(noise_variance: f64, iterations: usize) -> Result<Fixture> {
    if !(noise_variance.is_finite() && noise_variance > 0.0) {
        return Err(Error::invalid("noise variance must be positive and finite"));
    }
    if iterations == 0 {
        return Err(Error::invalid("need at least one iteration"));
    }
    let horizon = 2 * iterations;
    let g = UnrolledGraph::complete(&["A", "B"], horizon)?;
    let mut s = SystemSpec::new(g, Law::gaussian(1.0));
    s.add_input("A");
    let mut flowing = Vec::new();
    for i in 1..=iterations {
        let (send, recv) = (2 * i - 2, 2 * i - 1);
        let own = if send == 0 { Expr::Message } else { e("A", "A", send - 1) };
        let error = if send == 0 { Expr::Message } else { Expr::sub(e("A", "A", send - 1), e("B", "A", send - 1)) };
        s.send("A", "A", send, own).send("A", "B", send, error);
        if send > 0 {
            s.send("B", "B", send, e("B", "B", send - 1));
        }
        let previous = if send == 0 { Expr::int(0) } else { e("B", "B", send) };
        let update = Expr::add(vec![
            previous,
            Expr::mul(vec![Expr::ratio(1, i as i64), Expr::add(vec![e("A", "B", send), Expr::Noise])]),
        ]);
        s.set_noise("B", recv, Law::gaussian(noise_variance))
            .send("A", "A", recv, e("A", "A", send))
            .send("B", "A", recv, update.clone())
            .send("B", "B", recv, update);
        flowing.extend([
            format!("A{send}->A{recv}"),
            format!("A{send}->B{recv}"),
            format!("A{recv}->A{}", recv + 1),
            format!("B{recv}->A{}", recv + 1),
            format!("B{recv}->B{}", recv + 1),
        ]);
        if send > 0 {
            flowing.push(format!("B{send}->B{recv}"));
        }
    }
    let labels: Vec<&str> = flowing.iter().map(String::as_str).collect();
    Ok(Fixture::new("sk", "linear feedback scheme over an additive Gaussian channel", s).flows(
        "M",
        Derived,
        &labels,
    ))
}

/// Two independent bits meet an OR gate; a selector at `B` decides which
/// one reaches the output, and the message is defined as that output.
pub(super) fn output_message(selector: Selector) -> Fixture {
    let g = UnrolledGraph::complete(&["A", "B", "C", "D"], 3).expect("valid graph");
    let mut s = SystemSpec::new(g, Law::constant(Value::int(0)));
    let y = match selector {
        Selector::Zero => Expr::int(0),
        Selector::One => Expr::int(1),
        Selector::Random => {
            s.set_noise("B", 0, Law::fair_bit());
            Expr::Noise
        }
    };
    s.set_noise("A", 0, Law::fair_bit())
        .set_noise("C", 0, Law::fair_bit())
        .add_message("M", e("D", "D", 2))
        .send("A", "A", 0, Expr::Noise)
        .send("C", "C", 0, Expr::Noise)
        .send("B", "A", 0, y.clone())
        .send("B", "C", 0, y)
        .send("A", "D", 1, Expr::And(vec![e("A", "A", 0), e("B", "A", 0)]))
        .send("C", "D", 1, Expr::And(vec![e("C", "C", 0), Expr::not(e("B", "C", 0))]))
        .send("D", "D", 2, Expr::Or(vec![e("A", "D", 1), e("C", "D", 1)]));
    let (summary, flowing): (&str, &[&str]) = match selector {
        Selector::One => ("output-defined message; the selector routes the first bit", &["A0->A1", "A1->D2", "D2->D3"]),
        Selector::Zero => ("output-defined message; the selector routes the second bit", &["C0->C1", "C1->D2", "D2->D3"]),
        Selector::Random => (
            "output-defined message; a random selector makes every branch relevant",
            &["A0->A1", "B0->A1", "B0->C1", "C0->C1", "A1->D2", "C1->D2", "D2->D3"],
        ),
    };
    Fixture::new("output-msg", summary, s).flows("M", Stated, flowing)
}

/// Two messages that share a bit: both edges carry information about both.
pub(super) fn multiple_messages() -> Fixture {
    let g = UnrolledGraph::complete(&["A", "B", "C"], 2).expect("valid graph");
    let triples = (0..8)
        .map(|i| Value::tuple(vec![Value::int(i >> 2), Value::int((i >> 1) & 1), Value::int(i & 1)]))
        .collect();
    let mut s = SystemSpec::new(g, Law::uniform(triples));
    let pair = |k: usize| Expr::Concat(vec![Expr::select(k, Expr::Message), Expr::select(2, Expr::Message)]);
    s.add_input("A")
        .add_message("M1", pair(0))
        .add_message("M2", pair(1))
        .send("A", "B", 0, pair(0))
        .send("A", "C", 0, pair(1))
        .send("B", "B", 1, e("A", "B", 0))
        .send("C", "C", 1, e("A", "C", 0));
    let all = ["A0->B1", "A0->C1", "B1->B2", "C1->C2"];
    Fixture::new("mult-msg", "dependent messages sharing one bit", s)
        .flows("M1", Stated, &all)
        .flows("M2", Stated, &all)
}
