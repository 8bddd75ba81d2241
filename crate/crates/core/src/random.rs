//! Random small binary systems for property checks.

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::Expr;
use crate::graph::{EdgeRef, NodeRef, UnrolledGraph};
use crate::system::{Law, SystemSpec};

#[derive(Clone, Debug)]
pub struct RandomConfig {
    pub max_nodes: usize,
    pub max_horizon: usize,
    /// Upper bound on the number of nodes with a fair-bit noise source.
    pub max_noise: usize,
    /// Chance that an edge gets a non-constant function.
    pub edge_density: f64,
    /// Maximum depth of generated expressions.
    pub max_depth: usize,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig { max_nodes: 4, max_horizon: 4, max_noise: 6, edge_density: 0.5, max_depth: 3 }
    }
}

const NAMES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

/// A random system with a fair-bit message, binary transmissions built from
/// xor/and/or/not, and fair-bit noise at some nodes. Same seed, same system.
pub fn random_binary_system(seed: u64, cfg: &RandomConfig) -> SystemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=cfg.max_nodes.clamp(1, NAMES.len()));
    let horizon = rng.random_range(1..=cfg.max_horizon.max(1));
    let names = &NAMES[..n];
    let g = UnrolledGraph::complete(names, horizon).expect("valid names and horizon");
    let mut s = SystemSpec::new(g.clone(), Law::fair_bit());

    let inputs: Vec<&str> = {
        let k = rng.random_range(1..=n);
        let mut v = names.iter().copied().choose_multiple(&mut rng, k);
        v.sort_unstable();
        v
    };
    for a in &inputs {
        s.add_input(a);
    }

    let mut noisy = Vec::new();
    for t in 0..horizon {
        for a in names {
            noisy.push((*a, t));
        }
    }
    let k = rng.random_range(0..=cfg.max_noise.min(noisy.len()));
    for (a, t) in noisy.into_iter().choose_multiple(&mut rng, k) {
        s.set_noise(a, t, Law::fair_bit());
    }

    for t in 0..horizon {
        for src in names {
            let v = NodeRef::new(*src, t);
            let has_noise = s.noise.contains_key(&v);
            let reads_message = t == 0 && inputs.contains(src);
            let incoming = g.incoming(&v).expect("node in graph");
            let mut leaves: Vec<Expr> = incoming.iter().map(|e: &EdgeRef| Expr::Edge(e.clone())).collect();
            if has_noise {
                leaves.push(Expr::Noise);
            }
            if reads_message {
                leaves.push(Expr::Message);
            }
            if leaves.is_empty() {
                continue;
            }
            for dst in names {
                if rng.random_bool(cfg.edge_density) {
                    let e = random_expr(&mut rng, &leaves, cfg.max_depth);
                    s.send(src, dst, t, e);
                }
            }
        }
    }
    s
}

fn random_expr(rng: &mut ChaCha8Rng, leaves: &[Expr], depth: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.4) {
        let i = rng.random_range(0..leaves.len());
        return leaves[i].clone();
    }
    let op = rng.random_range(0..4);
    let a = random_expr(rng, leaves, depth - 1);
    if op == 3 {
        return Expr::not(a);
    }
    let pair = vec![a, random_expr(rng, leaves, depth - 1)];
    match op {
        0 => Expr::Xor(pair),
        1 => Expr::And(pair),
        _ => Expr::Or(pair),
    }
}
