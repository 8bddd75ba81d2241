//! Write Graphviz files for a fixture or a spec file: flow per message, with
//! pen width scaled by quantified flow, plus one path graph.
//!
//! ```text
//! cargo run --example export_dot -- butterfly /tmp/out
//! dot -Tsvg /tmp/out/butterfly-flow.dot -o flow.svg
//! ```

use std::path::PathBuf;

use infoflow::dot::{paths_to_dot, report_to_dot, DotOptions};
use infoflow::fixtures;
use infoflow::flow::{FlowConfig, FlowDetector};
use infoflow::paths::find_info_paths;
use infoflow::{exact_joint, SystemSpec};

fn main() -> infoflow::Result<()> {
    let mut args = std::env::args().skip(1);
    let source = args.next().unwrap_or_else(|| "butterfly".into());
    let dir = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let (name, spec) = if source.ends_with(".json") {
        let spec = SystemSpec::from_json_str(&std::fs::read_to_string(&source)?)?;
        ("spec".to_string(), spec)
    } else {
        (source.clone(), fixtures::build(&source)?.spec)
    };

    let joint = exact_joint(&spec)?;
    let config = FlowConfig { quantify: true, ..Default::default() };
    let mut reports = Vec::new();
    for m in spec.message_names() {
        reports.push(FlowDetector::new(joint.as_ref(), &spec.graph, &m, config.clone())?.analyze()?);
    }
    let opts = DotOptions { weight_by_bits: true, ..Default::default() };
    let flow_path = dir.join(format!("{name}-flow.dot"));
    std::fs::write(&flow_path, report_to_dot(&spec.graph, &reports, &opts))?;
    println!("wrote {}", flow_path.display());

    // Paths for the first message into the last node with any incoming flow.
    let first = &reports[0];
    let d = FlowDetector::new(joint.as_ref(), &spec.graph, &first.message, FlowConfig::default())?;
    if let Some(e) = first.flowing().into_iter().next_back() {
        let (h, _) = find_info_paths(first, &spec.graph, &e.dst, &d.input_nodes()?)?;
        let p = dir.join(format!("{name}-paths.dot"));
        std::fs::write(&p, paths_to_dot(&spec.graph, &h))?;
        println!("wrote {} (target {})", p.display(), e.dst);
    }
    Ok(())
}
