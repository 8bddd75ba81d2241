//! The three simpler flow tests each lose the message at t=1 on their own
//! counterexample, even though the message is recovered at t=2. The subset
//! definition keeps it.
//!
//! ```text
//! cargo run --example counterexamples
//! ```

use infoflow::exact_joint;
use infoflow::fixtures;
use infoflow::flow::{find_orphans, Candidate, FlowConfig, FlowDetector};

fn main() -> infoflow::Result<()> {
    let cases = [
        ("ce1", Candidate::Dependence),
        ("ce2", Candidate::ConditionOnOne),
        ("ce3", Candidate::ConditionOnAll),
    ];
    for (name, candidate) in cases {
        let f = fixtures::build(name)?;
        let joint = exact_joint(&f.spec)?;
        let d = FlowDetector::new(joint.as_ref(), &f.spec.graph, "M", FlowConfig::default())?;
        let simple = d.candidate_report(candidate)?;
        let full = d.analyze()?;

        println!("{name}: {}", f.summary);
        for t in 0..f.spec.graph.horizon() {
            let show = |v: Vec<infoflow::EdgeRef>| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
            println!("  t={t}  {candidate:?}: [{}]", show(simple.flowing_at(t)));
            println!("  t={t}  subset test: [{}]", show(full.flowing_at(t)));
        }
        for e in full.flowing_at(1) {
            let w = full.entry(&e).and_then(|x| x.witness.clone()).unwrap_or_default();
            let w: Vec<String> = w.iter().map(ToString::to_string).collect();
            println!("  {e} depends on M given {{{}}}", w.join(", "));
        }
        let orphans: Vec<String> = find_orphans(&full, &f.spec.graph).iter().map(ToString::to_string).collect();
        println!("  orphans: {}\n", orphans.join(", "));
    }
    Ok(())
}
