//! Network coding on the butterfly: the bottleneck node mixes two message
//! halves, and each receiver decodes with a side copy. Lists the information
//! paths that reach each receiver.

use infoflow::fixtures;
use infoflow::flow::{FlowConfig, FlowDetector};
use infoflow::paths::{enumerate_paths, find_info_paths};
use infoflow::{exact_joint, NodeRef};

fn main() -> infoflow::Result<()> {
    let f = fixtures::build("butterfly")?;
    let joint = exact_joint(&f.spec)?;
    for m in f.spec.message_names() {
        let d = FlowDetector::new(joint.as_ref(), &f.spec.graph, &m, FlowConfig::default())?;
        let report = d.analyze()?;
        let inputs = d.input_nodes()?;
        for target in [NodeRef::new("A", 4), NodeRef::new("B", 4)] {
            match find_info_paths(&report, &f.spec.graph, &target, &inputs) {
                Ok((h, cost)) => {
                    let (paths, _) = enumerate_paths(&h, 10);
                    println!("{m} -> {target}: {} path(s), {} node visits", paths.len(), cost.node_visits);
                    for p in paths {
                        let p: Vec<String> = p.iter().map(ToString::to_string).collect();
                        println!("    {}", p.join(" -> "));
                    }
                }
                Err(e) => println!("{m} -> {target}: {e}"),
            }
        }
    }
    Ok(())
}
