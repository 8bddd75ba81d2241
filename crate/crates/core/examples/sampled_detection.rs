//! Flow detection from simulated trials with permutation tests, compared
//! against the exact verdicts. Trials round-trip through CSV.
//!
//! ```text
//! cargo run --release --example sampled_detection -- ce2 10000 7
//! ```

use infoflow::fixtures;
use infoflow::flow::{FlowConfig, FlowDetector};
use infoflow::sampler::{analyze_sampled, sample_trials, SampledConfig, TrialMatrix};
use infoflow::exact_joint;

fn main() -> infoflow::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "ce1".into());
    let n: usize = args.next().map_or(10_000, |s| s.parse().expect("trial count"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let f = fixtures::build(&name)?;
    let trials = sample_trials(&f.spec, n, seed)?;
    let mut csv = Vec::new();
    trials.write_csv(&mut csv)?;
    let trials = TrialMatrix::read_csv(csv.as_slice())?;

    let sampled = analyze_sampled(&trials, &f.spec.graph, "M", &SampledConfig { seed, ..Default::default() })?;
    let joint = exact_joint(&f.spec)?;
    let exact = FlowDetector::new(joint.as_ref(), &f.spec.graph, "M", FlowConfig::default())?.analyze()?;

    println!("{name}, {n} trials, seed {seed}");
    for e in &sampled.edges {
        let truth = exact.has_flow(&e.edge);
        if e.has_flow || truth {
            println!(
                "  {:<8} sampled {:<5} exact {:<5} p={:.2e}",
                e.edge.to_string(),
                e.has_flow,
                truth,
                e.p_value.unwrap_or(1.0)
            );
        }
    }
    let agree = sampled.flowing() == exact.flowing();
    println!("agreement on every edge: {agree}");
    Ok(())
}
