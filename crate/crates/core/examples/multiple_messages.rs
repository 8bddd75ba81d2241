//! Two messages that share a component, tracked against one joint. The
//! shared part makes them dependent, which the report flags.

use infoflow::exact_joint;
use infoflow::fixtures;
use infoflow::flow::{analyze_messages, FlowConfig};

fn main() -> infoflow::Result<()> {
    let f = fixtures::build("mult-msg")?;
    let joint = exact_joint(&f.spec)?;
    for r in analyze_messages(joint.as_ref(), &f.spec.graph, &FlowConfig::default())? {
        let flowing: Vec<String> = r.flowing().iter().map(ToString::to_string).collect();
        println!("{}: {}", r.message, flowing.join(" "));
        for w in &r.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
