//! Exact joint tables over finite alphabets.
//!
//! Probabilities are integer weights over a common denominator, so the
//! conditional independence test `p(a,b,c) p(c) = p(a,c) p(b,c)` is decided in
//! exact integer arithmetic. Float CMI values are only for display.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;

use super::{InfoMeasure, VarId};
use crate::error::{Error, Result};
use crate::sim::Simulator;
use crate::system::{Law, Regime, SystemSpec};
use crate::value::Value;

/// Default cap on the number of (message, noise) realizations enumerated.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

const MAX_TOTAL: u128 = 1 << 63;

#[derive(Clone, Debug)]
pub struct DiscreteJoint {
    vars: Vec<VarId>,
    index: HashMap<VarId, usize>,
    dicts: Vec<Vec<Value>>,
    codes: Vec<Vec<u32>>,
    weights: Vec<u128>,
    total: u128,
}

pub fn enumerate_joint(spec: &SystemSpec) -> Result<DiscreteJoint> {
    enumerate_joint_with_budget(spec, DEFAULT_BUDGET)
}

/// Enumerate every (message, noise) realization, propagate it, and merge
/// identical outcomes.
pub fn enumerate_joint_with_budget(spec: &SystemSpec, budget: u128) -> Result<DiscreteJoint> {
    if spec.regime()? != Regime::Discrete {
        return Err(Error::invalid("exact enumeration needs finite alphabets; this system is Gaussian"));
    }
    let sim = Simulator::new(spec)?;
    let mut laws = vec![pmf(&spec.message)];
    laws.extend(sim.noise_nodes().iter().map(|v| pmf(&spec.noise[v])));

    let needed = laws
        .iter()
        .fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128));
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }

    // integer weights per law over the lcm of its denominators
    let mut scaled: Vec<Vec<u128>> = Vec::with_capacity(laws.len());
    let mut total: u128 = 1;
    for law in &laws {
        let l = law.iter().fold(1i64, |acc, (_, p)| acc.lcm(p.denom()));
        scaled.push(law.iter().map(|(_, p)| (*p.numer() * (l / *p.denom())) as u128).collect());
        total = total
            .checked_mul(l as u128)
            .filter(|t| *t <= MAX_TOTAL)
            .ok_or_else(|| Error::invalid("probability denominators are too large for exact enumeration"))?;
    }

    let mut vars: Vec<VarId> = sim.message_names().into_iter().map(VarId::message).collect();
    vars.extend(sim.edges().iter().cloned().map(VarId::Edge));
    let mut builder = Builder::new(vars);

    let mut digits = vec![0usize; laws.len()];
    let mut noise = vec![Value::zero(); laws.len() - 1];
    loop {
        let m = &laws[0][digits[0]].0;
        for k in 1..laws.len() {
            noise[k - 1] = laws[k][digits[k]].0.clone();
        }
        let w = digits
            .iter()
            .zip(&scaled)
            .fold(1u128, |acc, (&d, s)| acc * s[d]);
        let edges = sim.propagate(m, &noise)?;
        let mut outcome = sim.messages(m, &edges)?;
        outcome.extend(edges);
        builder.push(outcome, w)?;

        // advance the mixed-radix counter
        let mut k = 0;
        loop {
            if k == digits.len() {
                return builder.finish();
            }
            digits[k] += 1;
            if digits[k] < laws[k].len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

fn pmf(l: &Law) -> &[(Value, num_rational::Rational64)] {
    match l {
        Law::Pmf(s) => s,
        Law::Gaussian { .. } => unreachable!("regime checked"),
    }
}

struct Builder {
    vars: Vec<VarId>,
    dicts: Vec<HashMap<Value, u32>>,
    rows: HashMap<Vec<u32>, usize>,
    keys: Vec<Vec<u32>>,
    weights: Vec<u128>,
}

impl Builder {
    fn new(vars: Vec<VarId>) -> Self {
        let n = vars.len();
        Builder { vars, dicts: vec![HashMap::new(); n], rows: HashMap::new(), keys: Vec::new(), weights: Vec::new() }
    }

    fn push(&mut self, outcome: Vec<Value>, w: u128) -> Result<()> {
        if outcome.len() != self.vars.len() {
            return Err(Error::query("outcome arity does not match the variable list"));
        }
        let key: Vec<u32> = outcome
            .into_iter()
            .zip(self.dicts.iter_mut())
            .map(|(v, d)| {
                let next = d.len() as u32;
                *d.entry(v).or_insert(next)
            })
            .collect();
        match self.rows.get(&key) {
            Some(&r) => self.weights[r] += w,
            None => {
                self.rows.insert(key.clone(), self.keys.len());
                self.keys.push(key);
                self.weights.push(w);
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<DiscreteJoint> {
        let total: u128 = self.weights.iter().sum();
        if total == 0 || total > MAX_TOTAL {
            return Err(Error::query("joint weights must be positive and at most 2^63 in total"));
        }
        let n = self.vars.len();
        let codes = (0..n).map(|v| self.keys.iter().map(|k| k[v]).collect()).collect();
        let dicts = self
            .dicts
            .into_iter()
            .map(|d| {
                let mut out = vec![Value::zero(); d.len()];
                for (v, i) in d {
                    out[i as usize] = v;
                }
                out
            })
            .collect();
        let index = self.vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        Ok(DiscreteJoint { vars: self.vars, index, dicts, codes, weights: self.weights, total })
    }
}

/// Compact ids for the combined value of several columns.
#[derive(Clone)]
struct Groups {
    ids: Vec<u32>,
    count: usize,
}

fn refine(a: &Groups, b: &[u32], nb: usize) -> Groups {
    let n = a.ids.len();
    let mut ids = Vec::with_capacity(n);
    let cells = a.count.saturating_mul(nb);
    if cells <= 64 * n.max(16) {
        let mut table = vec![u32::MAX; cells];
        let mut next = 0u32;
        for (&x, &y) in a.ids.iter().zip(b) {
            let k = x as usize * nb + y as usize;
            if table[k] == u32::MAX {
                table[k] = next;
                next += 1;
            }
            ids.push(table[k]);
        }
        Groups { ids, count: next as usize }
    } else {
        let mut table: HashMap<(u32, u32), u32> = HashMap::new();
        for (&x, &y) in a.ids.iter().zip(b) {
            let next = table.len() as u32;
            ids.push(*table.entry((x, y)).or_insert(next));
        }
        Groups { ids, count: table.len() }
    }
}

fn mul_eq(a: u128, b: u128, c: u128, d: u128) -> bool {
    match (a.checked_mul(b), c.checked_mul(d)) {
        (Some(x), Some(y)) => x == y,
        _ => BigUint::from(a) * BigUint::from(b) == BigUint::from(c) * BigUint::from(d),
    }
}

/// Cell and margin weights of an (A, B, C) contingency table.
struct Table {
    abc: Vec<u128>,
    abc_ac: Vec<u32>,
    abc_bc: Vec<u32>,
    abc_c: Vec<u32>,
    ac: Vec<u128>,
    ac_c: Vec<u32>,
    bc: Vec<u128>,
    bc_c: Vec<u32>,
    c: Vec<u128>,
}

impl DiscreteJoint {
    /// Build a joint from weighted outcome rows (weights need not be
    /// normalized; duplicates are merged).
    pub fn from_weighted_rows(
        vars: Vec<VarId>,
        rows: impl IntoIterator<Item = (Vec<Value>, u128)>,
    ) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        if !vars.iter().all(|v| seen.insert(v.clone())) {
            return Err(Error::query("duplicate variable"));
        }
        let mut b = Builder::new(vars);
        for (outcome, w) in rows {
            if w > 0 {
                b.push(outcome, w)?;
            }
        }
        b.finish()
    }

    pub fn variables(&self) -> &[VarId] {
        &self.vars
    }

    pub fn num_rows(&self) -> usize {
        self.weights.len()
    }

    pub fn probability(&self, row: usize) -> Ratio<u128> {
        Ratio::new(self.weights[row], self.total)
    }

    pub fn value(&self, var: usize, row: usize) -> &Value {
        &self.dicts[var][self.codes[var][row] as usize]
    }

    pub fn outcome(&self, row: usize) -> Vec<Value> {
        (0..self.vars.len()).map(|v| self.value(v, row).clone()).collect()
    }

    /// Distinct values of one variable.
    pub fn alphabet(&self, var: usize) -> &[Value] {
        &self.dicts[var]
    }

    /// Marginal law of a set of variables, sorted by outcome.
    pub fn marginal(&self, vars: &[VarId]) -> Result<Vec<(Vec<Value>, Ratio<u128>)>> {
        let idx: Vec<usize> = vars.iter().map(|v| self.var(v)).collect::<Result<_>>()?;
        let mut acc: HashMap<Vec<Value>, u128> = HashMap::new();
        for r in 0..self.num_rows() {
            let key = idx.iter().map(|&v| self.value(v, r).clone()).collect();
            *acc.entry(key).or_default() += self.weights[r];
        }
        let mut out: Vec<_> = acc.into_iter().map(|(k, w)| (k, Ratio::new(w, self.total))).collect();
        out.sort();
        Ok(out)
    }

    /// Joint entropy in bits.
    pub fn entropy(&self, vars: &[VarId]) -> Result<f64> {
        let idx: Vec<usize> = vars.iter().map(|v| self.var(v)).collect::<Result<_>>()?;
        let g = self.group(&idx);
        let mut w = vec![0u128; g.count];
        for (r, &id) in g.ids.iter().enumerate() {
            w[id as usize] += self.weights[r];
        }
        let t = self.total as f64;
        Ok(w.iter().map(|&x| x as f64 / t).map(|p| -p * p.log2()).sum::<f64>().max(0.0))
    }

    fn group(&self, vars: &[usize]) -> Groups {
        let mut g = Groups { ids: vec![0; self.num_rows()], count: 1 };
        for &v in vars {
            let nv = self.dicts[v].len();
            if nv > 1 {
                g = if g.count == 1 {
                    Groups { ids: self.codes[v].clone(), count: nv }
                } else {
                    refine(&g, &self.codes[v], nv)
                };
            }
        }
        g
    }

    fn table(&self, a: &Groups, b: &Groups, c: &Groups) -> Table {
        let ac = refine(c, &a.ids, a.count);
        let bc = refine(c, &b.ids, b.count);
        let abc = refine(&ac, &b.ids, b.count);
        let mut t = Table {
            abc: vec![0; abc.count],
            abc_ac: vec![0; abc.count],
            abc_bc: vec![0; abc.count],
            abc_c: vec![0; abc.count],
            ac: vec![0; ac.count],
            ac_c: vec![0; ac.count],
            bc: vec![0; bc.count],
            bc_c: vec![0; bc.count],
            c: vec![0; c.count],
        };
        for r in 0..self.num_rows() {
            let w = self.weights[r];
            let (i, j, k, cc) = (abc.ids[r] as usize, ac.ids[r] as usize, bc.ids[r] as usize, c.ids[r]);
            t.abc[i] += w;
            t.abc_ac[i] = j as u32;
            t.abc_bc[i] = k as u32;
            t.abc_c[i] = cc;
            t.ac[j] += w;
            t.ac_c[j] = cc;
            t.bc[k] += w;
            t.bc_c[k] = cc;
            t.c[cc as usize] += w;
        }
        t
    }

    fn independent_groups(&self, a: &Groups, b: &Groups, c: &Groups) -> bool {
        if a.count == 1 || b.count == 1 {
            return true;
        }
        let t = self.table(a, b, c);
        for i in 0..t.abc.len() {
            let (j, k, cc) = (t.abc_ac[i] as usize, t.abc_bc[i] as usize, t.abc_c[i] as usize);
            if !mul_eq(t.abc[i], t.c[cc], t.ac[j], t.bc[k]) {
                return false;
            }
        }
        // every (a, b) pair supported inside a stratum must appear in it
        let mut n_ac = vec![0u64; t.c.len()];
        let mut n_bc = vec![0u64; t.c.len()];
        let mut n_abc = vec![0u64; t.c.len()];
        t.ac_c.iter().for_each(|&c| n_ac[c as usize] += 1);
        t.bc_c.iter().for_each(|&c| n_bc[c as usize] += 1);
        t.abc_c.iter().for_each(|&c| n_abc[c as usize] += 1);
        (0..t.c.len()).all(|c| n_abc[c] == n_ac[c] * n_bc[c])
    }
}

impl InfoMeasure for DiscreteJoint {
    fn variables(&self) -> &[VarId] {
        &self.vars
    }

    fn index_of(&self, v: &VarId) -> Option<usize> {
        self.index.get(v).copied()
    }

    fn independent(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<bool> {
        Ok(self.independent_groups(&self.group(a), &self.group(b), &self.group(c)))
    }

    fn cmi_bits(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        let (a, b, c) = (self.group(a), self.group(b), self.group(c));
        if self.independent_groups(&a, &b, &c) {
            return Ok(0.0);
        }
        let t = self.table(&a, &b, &c);
        let total = self.total as f64;
        let mut bits = 0.0;
        for i in 0..t.abc.len() {
            let (j, k, cc) = (t.abc_ac[i] as usize, t.abc_bc[i] as usize, t.abc_c[i] as usize);
            let w = t.abc[i] as f64;
            let ratio = (w * t.c[cc] as f64) / (t.ac[j] as f64 * t.bc[k] as f64);
            bits += w / total * ratio.log2();
        }
        Ok(bits.max(0.0))
    }

    fn is_constant(&self, v: usize) -> bool {
        self.dicts[v].len() == 1
    }

    fn same_information(&self, u: usize, v: usize) -> bool {
        let (nu, nv) = (self.dicts[u].len(), self.dicts[v].len());
        nu == nv && refine(&Groups { ids: self.codes[u].clone(), count: nu }, &self.codes[v], nv).count == nu
    }

    fn engine_name(&self) -> &'static str {
        "exact"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::graph::{EdgeRef, UnrolledGraph};

    fn one_time_pad() -> SystemSpec {
        let g = UnrolledGraph::complete(&["A", "B", "C"], 3).unwrap();
        let mut s = SystemSpec::new(g, Law::fair_bit());
        s.add_input("A")
            .set_noise("C", 0, Law::fair_bit())
            .send("A", "A", 0, Expr::Message)
            .send("C", "A", 0, Expr::Noise)
            .send("C", "C", 0, Expr::Noise)
            .send("A", "B", 1, Expr::xor(vec![Expr::edge("A", "A", 0), Expr::edge("C", "A", 0)]))
            .send("C", "B", 1, Expr::edge("C", "C", 0))
            .send("B", "B", 2, Expr::xor(vec![Expr::edge("A", "B", 1), Expr::edge("C", "B", 1)]));
        s
    }

    fn e(s: &str) -> VarId {
        s.parse().unwrap()
    }

    #[test]
    fn pad_joint_has_four_equiprobable_rows() {
        let j = enumerate_joint(&one_time_pad()).unwrap();
        assert_eq!(j.num_rows(), 4);
        for r in 0..4 {
            assert_eq!(j.probability(r), Ratio::new(1, 4));
        }
        assert_eq!(j.variables()[0], VarId::message("M"));
    }

    #[test]
    fn pad_information_values() {
        let j = enumerate_joint(&one_time_pad()).unwrap();
        let m = [VarId::message("M")];
        assert_eq!(j.cmi(&m, &[e("A1->B2")], &[]).unwrap(), 0.0);
        assert!((j.cmi(&m, &[e("A1->B2")], &[e("C1->B2")]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(j.cmi(&m, &[e("A0->B1")], &[]).unwrap(), 0.0);
        assert!((j.cmi(&m, &[e("B2->B3")], &[]).unwrap() - 1.0).abs() < 1e-12);
        assert!(j.cmi(&m, &[e("A1->B2")], &[e("A1->B2")]).is_err());
        assert!(j.cmi(&m, &[e("Q1->B2")], &[]).is_err());
        assert!((j.entropy(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn silent_system_has_one_row() {
        let g = UnrolledGraph::complete(&["A", "B"], 2).unwrap();
        let j = enumerate_joint(&SystemSpec::new(g, Law::constant(Value::zero()))).unwrap();
        assert_eq!(j.num_rows(), 1);
        assert_eq!(j.probability(0), Ratio::new(1, 1));
        assert!(j.outcome(0).iter().all(Value::is_zero));
    }

    #[test]
    fn budget_is_enforced() {
        let err = enumerate_joint_with_budget(&one_time_pad(), 3).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { needed: 4, budget: 3 }));
    }

    #[test]
    fn type_errors_surface() {
        let mut s = one_time_pad();
        s.send("B", "B", 2, Expr::xor(vec![Expr::int(2)]));
        assert!(matches!(enumerate_joint(&s), Err(Error::Eval(_))));
    }

    #[test]
    fn exact_test_catches_missing_cells() {
        // A and B uniform on {0,1} but (1,1) never occurs
        let vars = vec![VarId::message("A"), VarId::message("B")];
        let rows = vec![
            (vec![Value::int(0), Value::int(0)], 1u128),
            (vec![Value::int(0), Value::int(1)], 1),
            (vec![Value::int(1), Value::int(0)], 1),
        ];
        let j = DiscreteJoint::from_weighted_rows(vars, rows).unwrap();
        assert!(!j.independent(&[0], &[1], &[]).unwrap());
        assert!(j.cmi_bits(&[0], &[1], &[]).unwrap() > 0.0);
    }

    #[test]
    fn same_information_detects_relabelings() {
        let j = enumerate_joint(&one_time_pad()).unwrap();
        let c = j.edge_var(&EdgeRef::at("C", "A", 0)).unwrap();
        let d = j.edge_var(&EdgeRef::at("C", "C", 0)).unwrap();
        let x = j.edge_var(&EdgeRef::at("A", "B", 1)).unwrap();
        assert!(j.same_information(c, d));
        assert!(!j.same_information(c, x));
    }
}
