//! Seeded random binary systems: count how often flow dies out and check
//! that it never comes back.

use infoflow::exact_joint;
use infoflow::flow::{FlowConfig, FlowDetector};
use infoflow::random::{random_binary_system, RandomConfig};

fn main() -> infoflow::Result<()> {
    let count: u64 = std::env::args().nth(1).map_or(200, |s| s.parse().expect("system count"));
    let cfg = RandomConfig::default();
    let (mut died, mut revived) = (0, 0);
    for seed in 0..count {
        let s = random_binary_system(seed, &cfg);
        let joint = exact_joint(&s)?;
        let r = FlowDetector::new(joint.as_ref(), &s.graph, "M", FlowConfig::default())?.analyze()?;
        let silent: Vec<bool> = (0..s.graph.horizon()).map(|t| r.flowing_at(t).is_empty()).collect();
        if let Some(t) = silent.iter().position(|&x| x) {
            died += 1;
            revived += silent[t..].iter().any(|&x| !x) as usize;
        }
    }
    println!("{count} systems: flow died out in {died}, came back in {revived}");
    Ok(())
}
