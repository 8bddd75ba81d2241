mod common;

use std::collections::BTreeSet;

use common::{Oracle, ZERO_BITS};
use infoflow::dot::{report_to_dot, DotOptions};
use infoflow::flow::{FlowConfig, FlowDetector};
use infoflow::paths::{find_info_paths, zero_information_cut};
use infoflow::random::{random_binary_system, RandomConfig};
use infoflow::sampler::{analyze_sampled, sample_trials, SampledConfig};
use infoflow::{enumerate_joint, exact_joint, EdgeRef, Error, InfoMeasure, NodeRef, SystemSpec, VarId};
use proptest::prelude::*;

fn system(seed: u64) -> SystemSpec {
    random_binary_system(seed, &RandomConfig::default())
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn silence_at_a_slice_matches_independence_of_the_slice(seed in any::<u64>()) {
        let s = system(seed);
        let j = exact_joint(&s).unwrap();
        let r = FlowDetector::new(j.as_ref(), &s.graph, "M", FlowConfig::default()).unwrap().analyze().unwrap();
        let o = Oracle::new(&s);
        for t in 0..s.graph.horizon() {
            let silent = r.flowing_at(t).is_empty();
            let bits = o.cmi(&s.graph.edges_at(t), &[]);
            prop_assert_eq!(silent, bits < ZERO_BITS, "t={} bits={}", t, bits);
        }
    }

    #[test]
    fn silence_persists(seed in any::<u64>()) {
        let s = system(seed);
        let j = exact_joint(&s).unwrap();
        let r = FlowDetector::new(j.as_ref(), &s.graph, "M", FlowConfig::default()).unwrap().analyze().unwrap();
        let h = s.graph.horizon();
        if let Some(t) = (0..h).find(|&t| r.flowing_at(t).is_empty()) {
            for later in t..h {
                prop_assert!(r.flowing_at(later).is_empty(), "flow returns at t={} after silence at t={}", later, t);
            }
        }
    }

    #[test]
    fn verdicts_agree_with_brute_force_information(seed in any::<u64>()) {
        let s = system(seed);
        let j = exact_joint(&s).unwrap();
        let d = FlowDetector::new(j.as_ref(), &s.graph, "M", FlowConfig::default()).unwrap();
        let o = Oracle::new(&s);
        for t in 0..s.graph.horizon() {
            let distinct = o.distinct_edges_at(&s, t);
            for e in s.graph.edges_at(t) {
                let v = d.edge_flow(&e).unwrap();
                let single = [e.clone()];
                if o.cmi(&single, &[]) > ZERO_BITS {
                    prop_assert!(v.has_flow, "{} depends on M but has no flow", e);
                }
                if let Some(w) = &v.witness {
                    prop_assert!(o.cmi(&single, w) > ZERO_BITS, "{} witness {:?} is empty", e, w);
                }
                let others: Vec<EdgeRef> = distinct.iter().filter(|x| **x != e).cloned().collect();
                if !v.has_flow && others.len() <= 10 {
                    prop_assert!(o.max_cmi(&e, &others) < ZERO_BITS, "{} silent but some subset reveals M", e);
                }
            }
        }
    }

    #[test]
    fn node_outputs_add_nothing_to_node_inputs(seed in any::<u64>(), pick in any::<u64>()) {
        let s = system(seed);
        let j = exact_joint(&s).unwrap();
        let o = Oracle::new(&s);
        let g = &s.graph;
        for t in 1..g.horizon() {
            let nodes = g.nodes_at(t);
            let k = 1 + (pick as usize % nodes.len().min(3));
            let start = (pick >> 8) as usize % nodes.len();
            let subset: Vec<NodeRef> = (0..k).map(|i| nodes[(start + i) % nodes.len()].clone()).collect();
            let q: Vec<EdgeRef> = subset.iter().flat_map(|v| g.outgoing(v).unwrap()).collect();
            let p: Vec<EdgeRef> = subset.iter().flat_map(|v| g.incoming(v).unwrap()).collect();
            prop_assert!(o.cmi(&q, &p) < ZERO_BITS);
            let qv: Vec<VarId> = q.iter().map(VarId::from).collect();
            let pv: Vec<VarId> = p.iter().map(VarId::from).collect();
            prop_assert!(j.is_zero_cmi(&[VarId::message("M")], &qv, &pv).unwrap());
        }
    }

    #[test]
    fn a_set_flows_iff_a_member_flows(seed in any::<u64>(), pick in any::<u64>()) {
        let s = system(seed);
        let j = exact_joint(&s).unwrap();
        let d = FlowDetector::new(j.as_ref(), &s.graph, "M", FlowConfig::default()).unwrap();
        let t = pick as usize % s.graph.horizon();
        let edges = s.graph.edges_at(t);
        for r in 0..8u64 {
            let x = pick.rotate_left(r as u32 * 7) ^ r;
            let k = 1 + (x as usize % edges.len().min(3));
            let set: BTreeSet<EdgeRef> = (0..k).map(|i| edges[(x as usize / 3 + i * 5) % edges.len()].clone()).collect();
            let set: Vec<EdgeRef> = set.into_iter().collect();
            let any = set.iter().any(|e| d.edge_flow(e).unwrap().has_flow);
            prop_assert_eq!(d.set_flow(&set).unwrap().has_flow, any, "{:?}", set);
        }
    }

    #[test]
    fn missing_paths_match_zero_information_cuts(seed in any::<u64>()) {
        let s = system(seed);
        let j = exact_joint(&s).unwrap();
        let d = FlowDetector::new(j.as_ref(), &s.graph, "M", FlowConfig::default()).unwrap();
        let r = d.analyze().unwrap();
        let inputs = d.input_nodes().unwrap();
        let o = Oracle::new(&s);
        for v in s.graph.nodes().into_iter().filter(|v| v.time > 0) {
            let found = find_info_paths(&r, &s.graph, &v, &inputs);
            let cut = if inputs.is_empty() {
                None
            } else {
                Some(zero_information_cut(&r, &s.graph, &inputs, &BTreeSet::from([v.clone()])).unwrap())
            };
            match found {
                Ok((h, _)) => {
                    prop_assert!(!h.edges.is_empty());
                    prop_assert_eq!(cut, Some(None));
                }
                Err(Error::NoPathFound(_)) => prop_assert!(cut.is_none() || matches!(cut, Some(Some(_)))),
                Err(e) => prop_assert!(false, "unexpected error {}", e),
            }
            let out = s.graph.outgoing(&v).unwrap();
            if !out.is_empty() && o.cmi(&out, &[]) > ZERO_BITS {
                prop_assert!(find_info_paths(&r, &s.graph, &v, &inputs).is_ok(), "{} depends on M without a path", v);
            }
        }
    }

    #[test]
    fn chain_rule_and_nonnegativity(seed in any::<u64>(), pick in any::<u64>()) {
        let s = system(seed);
        let j = enumerate_joint(&s).unwrap();
        let edges: Vec<VarId> = s.graph.edges().iter().map(VarId::from).collect();
        let take = |x: u64| -> Vec<VarId> {
            edges.iter().enumerate().filter(|(i, _)| (x >> (i % 64)) & 1 == 1 && i % 3 == (x % 3) as usize).map(|(_, v)| v.clone()).collect()
        };
        let b = take(pick);
        let c: Vec<VarId> = take(pick.rotate_left(17)).into_iter().filter(|v| !b.contains(v)).collect();
        let a = [VarId::message("M")];
        let bc: Vec<VarId> = b.iter().chain(&c).cloned().collect();
        let whole = j.cmi(&a, &bc, &[]).unwrap();
        let split = j.cmi(&a, &b, &[]).unwrap() + j.cmi(&a, &c, &b).unwrap();
        prop_assert!((whole - split).abs() < 1e-9, "{} vs {}", whole, split);
        prop_assert!(j.cmi(&a, &b, &c).unwrap() >= 0.0);
    }

    #[test]
    fn spec_json_round_trips(seed in any::<u64>()) {
        let s = system(seed);
        prop_assert_eq!(SystemSpec::from_json_str(&s.to_json_string()).unwrap(), s);
    }

    #[test]
    fn dot_output_is_deterministic(seed in any::<u64>()) {
        let s = system(seed);
        let j = exact_joint(&s).unwrap();
        let run = || {
            let r = FlowDetector::new(j.as_ref(), &s.graph, "M", FlowConfig::default()).unwrap().analyze().unwrap();
            report_to_dot(&s.graph, &[r], &DotOptions::default())
        };
        prop_assert_eq!(run(), run());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn seeded_sampling_is_reproducible(seed in any::<u64>(), trial_seed in any::<u64>()) {
        let s = system(seed);
        let a = sample_trials(&s, 300, trial_seed).unwrap();
        let b = sample_trials(&s, 300, trial_seed).unwrap();
        prop_assert_eq!(a.rows(), b.rows());
        prop_assert!(a.is_consistent_with(&s).unwrap());
        let c = SampledConfig { seed: trial_seed, n_perm: Some(99), max_subset_size: 1, ..Default::default() };
        prop_assert_eq!(analyze_sampled(&a, &s.graph, "M", &c).unwrap(), analyze_sampled(&b, &s.graph, "M", &c).unwrap());
    }
}

/// Agreement with the exact verdicts should not get worse with more trials.
#[test]
fn sampled_agreement_improves_with_trials() {
    let f = infoflow::fixtures::build("ce1").unwrap();
    let j = exact_joint(&f.spec).unwrap();
    let exact = FlowDetector::new(j.as_ref(), &f.spec.graph, "M", FlowConfig::default()).unwrap().analyze().unwrap();
    let mut rates = Vec::new();
    for n in [100, 1_000, 10_000] {
        let mut agree = 0;
        let seeds = 5;
        for seed in 0..seeds {
            let t = sample_trials(&f.spec, n, seed).unwrap();
            let r = analyze_sampled(&t, &f.spec.graph, "M", &SampledConfig { seed, ..Default::default() }).unwrap();
            if r.flowing() == exact.flowing() {
                agree += 1;
            }
        }
        rates.push(agree as f64 / seeds as f64);
    }
    assert!(rates.windows(2).all(|w| w[1] >= w[0]), "{rates:?}");
    assert_eq!(*rates.last().unwrap(), 1.0, "{rates:?}");
}
