//! What can be learned when node `H` is not observed: the slice-to-slice
//! alarm and the per-node check, on each hidden-node fixture.

use infoflow::derived::{hidden_node_alarm, local_markov_alarms, ObservationMask};
use infoflow::exact_joint;
use infoflow::fixtures;

fn main() -> infoflow::Result<()> {
    for name in ["hidden-basic", "hidden-source", "hidden-ignored", "hidden-redundant-a", "hidden-redundant-b"] {
        let f = fixtures::build(name)?;
        let joint = exact_joint(&f.spec)?;
        let g = &f.spec.graph;
        let mask = ObservationMask::new(&f.hidden);
        println!("{name}: {}", f.summary);
        for t in 0..g.horizon() - 1 {
            let a = hidden_node_alarm(joint.as_ref(), g, "M", &mask, t)?;
            let local = local_markov_alarms(joint.as_ref(), g, "M", &mask, t + 1)?;
            let local: Vec<String> = local.iter().map(ToString::to_string).collect();
            println!(
                "  t={t}->{}: global {}  local [{}]",
                t + 1,
                if a.alarm { "ALARM" } else { "clear" },
                local.join(", ")
            );
        }
    }
    Ok(())
}
