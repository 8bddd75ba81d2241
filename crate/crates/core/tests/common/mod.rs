//! Brute-force information oracle shared by the integration tests. It
//! enumerates realizations with floating-point probabilities and computes
//! entropies from scratch, independently of the library's joint engines.
#![allow(dead_code)]

use std::collections::HashMap;

use infoflow::sim::Simulator;
use infoflow::{EdgeRef, Law, SystemSpec, Value};

pub struct Oracle {
    edges: Vec<EdgeRef>,
    /// Root message value, then every edge value, with probability.
    rows: Vec<(Vec<Value>, f64)>,
}

fn pmf(law: &Law) -> Vec<(Value, f64)> {
    match law {
        Law::Pmf(s) => s.iter().map(|(v, p)| (v.clone(), *p.numer() as f64 / *p.denom() as f64)).collect(),
        Law::Gaussian { .. } => panic!("oracle handles finite laws only"),
    }
}

impl Oracle {
    pub fn new(spec: &SystemSpec) -> Oracle {
        let sim = Simulator::new(spec).unwrap();
        let laws: Vec<Vec<(Value, f64)>> = sim.noise_nodes().iter().map(|v| pmf(&spec.noise[v])).collect();
        let mut rows = Vec::new();
        for (m, pm) in pmf(&spec.message) {
            let mut idx = vec![0usize; laws.len()];
            loop {
                let w: Vec<Value> = idx.iter().zip(&laws).map(|(&i, l)| l[i].0.clone()).collect();
                let p: f64 = pm * idx.iter().zip(&laws).map(|(&i, l)| l[i].1).product::<f64>();
                let mut row = vec![m.clone()];
                row.extend(sim.propagate(&m, &w).unwrap());
                rows.push((row, p));
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < laws[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
        Oracle { edges: sim.edges().to_vec(), rows }
    }

    fn col(&self, e: &EdgeRef) -> usize {
        1 + self.edges.iter().position(|x| x == e).expect("edge in system")
    }

    /// Entropy in bits of the message (if `with_m`) together with `edges`.
    fn entropy(&self, with_m: bool, edges: &[&EdgeRef]) -> f64 {
        let cols: Vec<usize> = with_m.then_some(0).into_iter().chain(edges.iter().map(|e| self.col(e))).collect();
        let mut acc: HashMap<Vec<&Value>, f64> = HashMap::new();
        for (row, p) in &self.rows {
            *acc.entry(cols.iter().map(|&c| &row[c]).collect()).or_default() += p;
        }
        acc.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }

    /// `I(M; B | C)` in bits.
    pub fn cmi(&self, b: &[EdgeRef], c: &[EdgeRef]) -> f64 {
        let bc: Vec<&EdgeRef> = b.iter().chain(c).collect();
        let cc: Vec<&EdgeRef> = c.iter().collect();
        let v = self.entropy(true, &cc) + self.entropy(false, &bc) - self.entropy(true, &bc) - self.entropy(false, &cc);
        v.max(0.0)
    }

    /// `I(M; X(e) | X(c))` over every `c` drawn from `others`, largest value.
    pub fn max_cmi(&self, e: &EdgeRef, others: &[EdgeRef]) -> f64 {
        let mut best = 0.0f64;
        for mask in 0u32..(1 << others.len()) {
            let c: Vec<EdgeRef> = others
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, x)| x.clone())
                .collect();
            best = best.max(self.cmi(std::slice::from_ref(e), &c));
        }
        best
    }

    pub fn is_constant(&self, e: &EdgeRef) -> bool {
        let c = self.col(e);
        self.rows.iter().all(|(r, _)| r[c] == self.rows[0].0[c])
    }

    /// Non-constant edges at time `t`, one per distinct column.
    pub fn distinct_edges_at(&self, spec: &SystemSpec, t: usize) -> Vec<EdgeRef> {
        let mut out: Vec<EdgeRef> = Vec::new();
        for e in spec.graph.edges_at(t) {
            if self.is_constant(&e) {
                continue;
            }
            let c = self.col(&e);
            let dup = out.iter().any(|o| {
                let d = self.col(o);
                self.rows.iter().all(|(r, _)| r[c] == r[d])
            });
            if !dup {
                out.push(e);
            }
        }
        out
    }
}

/// Numerical floor below which oracle information counts as zero.
pub const ZERO_BITS: f64 = 1e-9;
