//! Linear-Gaussian feedback channel. The receiver's estimate improves with
//! every round, which shows up as growing quantified flow on its memory
//! edge, while the sender's error signal loses its direct dependence on
//! the message after the first round.
//!
//! ```text
//! cargo run --example feedback_channel -- 0.5 4
//! ```

use infoflow::derived::is_derived;
use infoflow::fixtures::{self, FixtureParams};
use infoflow::flow::{FlowConfig, FlowDetector};
use infoflow::{exact_joint, EdgeRef, VarId};

fn main() -> infoflow::Result<()> {
    let mut args = std::env::args().skip(1);
    let noise_variance = args.next().map_or(1.0, |s| s.parse().expect("noise variance"));
    let iterations = args.next().map_or(3, |s| s.parse().expect("iterations"));
    let f = fixtures::build_with("sk", &FixtureParams { noise_variance, iterations, ..Default::default() })?;
    let joint = exact_joint(&f.spec)?;
    let d = FlowDetector::new(joint.as_ref(), &f.spec.graph, "M", FlowConfig::default())?;
    let m = VarId::message("M");

    println!("noise variance {noise_variance}, {iterations} rounds");
    for i in 1..=iterations {
        let estimate: EdgeRef = format!("B{}->B{}", 2 * i - 1, 2 * i).parse()?;
        let error: EdgeRef = format!("A{}->B{}", 2 * i - 2, 2 * i - 1).parse()?;
        let closed_form = 0.5 * (1.0 + i as f64 / noise_variance).log2();
        println!(
            "round {i}: estimate flow {:.6} bits (closed form {closed_form:.6}), I(M; sent error) = {}",
            d.quantified_flow(&estimate)?,
            joint.cmi(std::slice::from_ref(&m), &[VarId::Edge(error)], &[])?
        );
    }

    if iterations >= 3 {
        let e = |s: &str| s.parse::<EdgeRef>();
        let a = is_derived(joint.as_ref(), "M", &[e("B3->B4")?], &[e("A2->A3")?, e("A2->B3")?])?;
        let b = is_derived(joint.as_ref(), "M", &[e("A4->B5")?], &[e("B1->B2")?, e("B3->B4")?])?;
        println!("second estimate derived from message and error: {a}");
        println!("next error derived from the first two estimates: {b}");
    }
    Ok(())
}
