//! A 4-point FFT with exact complex arithmetic. Changing how the message
//! selects the input signal changes which part of the network carries it.

use infoflow::fixtures;
use infoflow::flow::{FlowConfig, FlowDetector};
use infoflow::sim::Simulator;
use infoflow::{exact_joint, Value};

fn main() -> infoflow::Result<()> {
    for name in ["fft-even", "fft-phase"] {
        let f = fixtures::build(name)?;
        println!("{name}: {}", f.summary);

        let sim = Simulator::new(&f.spec)?;
        for m in 0..2 {
            let values = sim.propagate(&Value::int(m), &[])?;
            let outputs: Vec<String> = sim
                .edges()
                .iter()
                .zip(&values)
                .filter(|(e, _)| e.dst.time == f.spec.graph.horizon() && e.src.name == e.dst.name)
                .map(|(_, v)| v.to_string())
                .collect();
            println!("  M={m}: outputs {}", outputs.join(", "));
        }

        let joint = exact_joint(&f.spec)?;
        let r = FlowDetector::new(joint.as_ref(), &f.spec.graph, "M", FlowConfig::default())?.analyze()?;
        let flowing: Vec<String> = r.flowing().iter().map(ToString::to_string).collect();
        println!("  flowing: {}\n", flowing.join(" "));
    }
    Ok(())
}
