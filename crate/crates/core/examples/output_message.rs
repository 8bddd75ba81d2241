//! A message defined at the output: which edges carry it depends on an
//! external selector rather than on the message itself.

use infoflow::exact_joint;
use infoflow::fixtures::{self, FixtureParams, Selector};
use infoflow::flow::{FlowConfig, FlowDetector};

fn main() -> infoflow::Result<()> {
    for selector in [Selector::Zero, Selector::One, Selector::Random] {
        let f = fixtures::build_with("output-msg", &FixtureParams { selector, ..Default::default() })?;
        let joint = exact_joint(&f.spec)?;
        let d = FlowDetector::new(joint.as_ref(), &f.spec.graph, "M", FlowConfig::default())?;
        let r = d.analyze()?;
        let flowing: Vec<String> = r.flowing().iter().map(ToString::to_string).collect();
        let sources: Vec<String> = d.input_nodes()?.iter().map(ToString::to_string).collect();
        println!("{selector:?}: sources [{}]", sources.join(", "));
        println!("  flowing: {}", flowing.join(" "));
    }
    Ok(())
}
