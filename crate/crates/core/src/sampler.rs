//! Trial sampling and the permutation-test flow detector.
//!
//! The null distribution of a conditional test permutes one column within
//! strata of identical conditioning values. Only the resulting contingency
//! tables matter to the statistic, so each replicate draws those tables
//! directly from their multivariate hypergeometric law instead of shuffling
//! rows.

use std::collections::HashMap;
use std::io::{Read, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Hypergeometric;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, UnrolledGraph};
use crate::joint::VarId;
use crate::report::{EdgeEntry, FlowReport};
use crate::sim::Simulator;
use crate::system::{Law, Regime, SystemSpec};
use crate::value::Value;

/// One latent draw: the root message and every node's noise.
pub type Latent = (Value, Vec<Value>);

/// Observed trials, one row per realization. Columns are the messages
/// followed by every edge in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialMatrix {
    columns: Vec<VarId>,
    rows: Vec<Vec<Value>>,
    codes: Vec<Vec<u32>>,
    latent: Option<Vec<Latent>>,
    pub seed: Option<u64>,
}

impl TrialMatrix {
    pub fn new(columns: Vec<VarId>, rows: Vec<Vec<Value>>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(Error::Parse(format!("row has {} values, header has {}", r.len(), columns.len())));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(c) = columns.iter().find(|c| !seen.insert(*c)) {
            return Err(Error::Parse(format!("column {c} appears twice")));
        }
        let codes = (0..columns.len())
            .map(|j| {
                let mut dict: HashMap<&Value, u32> = HashMap::new();
                rows.iter()
                    .map(|r| {
                        let n = dict.len() as u32;
                        *dict.entry(&r[j]).or_insert(n)
                    })
                    .collect()
            })
            .collect();
        Ok(TrialMatrix { columns, rows, codes, latent: None, seed: None })
    }

    pub fn columns(&self) -> &[VarId] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn n_trials(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, v: &VarId) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == v)
            .ok_or_else(|| Error::UnknownVariable(v.to_string()))
    }

    /// Latent draws behind each row, when the matrix was sampled here.
    pub fn latent(&self) -> Option<&[Latent]> {
        self.latent.as_deref()
    }

    pub fn is_constant(&self, col: usize) -> bool {
        self.codes[col].iter().all(|&c| c == 0)
    }

    /// Re-propagate every latent draw and compare with the stored row.
    pub fn is_consistent_with(&self, spec: &SystemSpec) -> Result<bool> {
        let Some(latent) = &self.latent else {
            return Err(Error::query("this trial matrix carries no latent draws"));
        };
        let sim = Simulator::new(spec)?;
        for ((m, w), row) in latent.iter().zip(&self.rows) {
            let edges = sim.propagate(m, w)?;
            let msgs = sim.messages(m, &edges)?;
            let expect: Vec<&Value> = msgs.iter().chain(&edges).collect();
            if expect.len() != row.len() || expect.into_iter().zip(row).any(|(a, b)| a != b) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.into());
        out.write_record(self.columns.iter().map(|c| c.to_string())).map_err(io)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|v| v.to_string())).map_err(io)?;
        }
        Ok(out.flush()?)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
        let parse = |e: csv::Error| Error::Parse(e.to_string());
        let columns = rdr
            .headers()
            .map_err(parse)?
            .iter()
            .map(str::parse)
            .collect::<Result<Vec<VarId>>>()?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec.map_err(parse)?.iter().map(str::parse).collect::<Result<Vec<Value>>>()?);
        }
        TrialMatrix::new(columns, rows)
    }
}

/// Draw `n` independent realizations of a finite-alphabet system.
pub fn sample_trials(spec: &SystemSpec, n: usize, seed: u64) -> Result<TrialMatrix> {
    if n == 0 {
        return Err(Error::query("need at least one trial"));
    }
    if spec.regime()? != Regime::Discrete {
        return Err(Error::invalid(
            "trial matrices hold finite-alphabet values; sample Gaussian systems with GaussianJoint::sample",
        ));
    }
    let sim = Simulator::new(spec)?;
    let laws: Vec<&Law> = std::iter::once(&spec.message)
        .chain(sim.noise_nodes().iter().map(|v| &spec.noise[v]))
        .collect();
    let pickers = laws
        .iter()
        .map(|l| match l {
            Law::Pmf(s) => {
                let w: Vec<f64> = s.iter().map(|(_, p)| *p.numer() as f64 / *p.denom() as f64).collect();
                WeightedIndex::new(w).map_err(|e| Error::invalid(e.to_string()))
            }
            Law::Gaussian { .. } => unreachable!("regime checked"),
        })
        .collect::<Result<Vec<_>>>()?;
    let support = |k: usize, i: usize| match laws[k] {
        Law::Pmf(s) => s[i].0.clone(),
        Law::Gaussian { .. } => unreachable!("regime checked"),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut latent = Vec::with_capacity(n);
    for _ in 0..n {
        let draws: Vec<Value> = pickers.iter().enumerate().map(|(k, p)| support(k, p.sample(&mut rng))).collect();
        let m = draws[0].clone();
        let w = draws[1..].to_vec();
        let edges = sim.propagate(&m, &w)?;
        let mut row = sim.messages(&m, &edges)?;
        row.extend(edges);
        rows.push(row);
        latent.push((m, w));
    }
    let mut columns: Vec<VarId> = sim.message_names().into_iter().map(VarId::message).collect();
    columns.extend(sim.edges().iter().cloned().map(VarId::Edge));
    let mut t = TrialMatrix::new(columns, rows)?;
    t.latent = Some(latent);
    t.seed = Some(seed);
    Ok(t)
}

/// Dense ids for the joint value of several columns.
fn combine(t: &TrialMatrix, cols: &[usize]) -> (Vec<u32>, usize) {
    let n = t.n_trials();
    let mut ids = vec![0u32; n];
    let mut k = 1usize;
    for &c in cols {
        let mut dict: HashMap<(u32, u32), u32> = HashMap::new();
        for (id, &x) in ids.iter_mut().zip(&t.codes[c]) {
            let next = dict.len() as u32;
            *id = *dict.entry((*id, x)).or_insert(next);
        }
        k = dict.len();
    }
    (ids, k)
}

/// Contingency tables of `(a, b)` per stratum of `c`.
struct Strata {
    n: usize,
    /// Per stratum: row margins, column margins, observed cells.
    tables: Vec<(Vec<u64>, Vec<u64>, Vec<u64>)>,
}

impl Strata {
    fn new(a: &[u32], ka: usize, b: &[u32], kb: usize, c: &[u32], kc: usize) -> Self {
        let mut tables = vec![(vec![0u64; ka], vec![0u64; kb], vec![0u64; ka * kb]); kc];
        for i in 0..a.len() {
            let t = &mut tables[c[i] as usize];
            t.0[a[i] as usize] += 1;
            t.1[b[i] as usize] += 1;
            t.2[a[i] as usize * kb + b[i] as usize] += 1;
        }
        Strata { n: a.len(), tables }
    }

    fn statistic_of(&self, cells: &[Vec<u64>]) -> f64 {
        let mut s = 0.0;
        for ((rows, cols, _), cell) in self.tables.iter().zip(cells) {
            let nc: u64 = rows.iter().sum();
            let kb = cols.len();
            for (i, &r) in rows.iter().enumerate() {
                for (j, &q) in cols.iter().enumerate() {
                    let x = cell[i * kb + j];
                    if x > 0 {
                        s += x as f64 * ((x * nc) as f64 / (r * q) as f64).log2();
                    }
                }
            }
        }
        (s / self.n as f64).max(0.0)
    }

    fn statistic(&self) -> f64 {
        let cells: Vec<Vec<u64>> = self.tables.iter().map(|t| t.2.clone()).collect();
        self.statistic_of(&cells)
    }

    fn degenerate(&self) -> bool {
        self.tables.iter().all(|(rows, _, _)| rows.iter().sum::<u64>() <= 1)
    }

    /// Tables with the same margins, drawn as a uniform permutation of `b`
    /// within each stratum would produce them.
    fn permuted(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<u64>> {
        self.tables
            .iter()
            .map(|(rows, cols, _)| {
                let kb = cols.len();
                let mut pool = cols.clone();
                let mut left: u64 = pool.iter().sum();
                let mut cell = vec![0u64; rows.len() * kb];
                for (i, &r) in rows.iter().enumerate() {
                    let mut need = r;
                    let mut rest = left;
                    for j in 0..kb {
                        if need == 0 {
                            break;
                        }
                        let x = if pool[j] == rest {
                            need
                        } else if pool[j] == 0 {
                            0
                        } else {
                            Hypergeometric::new(rest, pool[j], need).expect("valid parameters").sample(rng)
                        };
                        cell[i * kb + j] = x;
                        rest -= pool[j];
                        pool[j] -= x;
                        need -= x;
                    }
                    left -= r;
                }
                cell
            })
            .collect()
    }
}

fn columns_of(t: &TrialMatrix, vars: &[VarId]) -> Result<Vec<usize>> {
    vars.iter().map(|v| t.column(v)).collect()
}

/// Plug-in estimate of `I(A; B | C)` in bits from empirical frequencies.
pub fn plug_in_cmi(t: &TrialMatrix, a: &[VarId], b: &[VarId], c: &[VarId]) -> Result<f64> {
    Ok(strata(t, &columns_of(t, a)?, &columns_of(t, b)?, &columns_of(t, c)?).statistic())
}

fn strata(t: &TrialMatrix, a: &[usize], b: &[usize], c: &[usize]) -> Strata {
    let (a, ka) = combine(t, a);
    let (b, kb) = combine(t, b);
    let (c, kc) = combine(t, c);
    Strata::new(&a, ka, &b, kb, &c, kc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationTest {
    pub statistic: f64,
    pub p_value: f64,
    /// Every stratum held a single trial, so nothing could be permuted.
    pub degenerate: bool,
}

/// Conditional independence test of `A` and `B` given `C`.
pub fn permutation_ci_test(
    t: &TrialMatrix,
    a: &[VarId],
    b: &[VarId],
    c: &[VarId],
    n_perm: usize,
    seed: u64,
) -> Result<PermutationTest> {
    let s = strata(t, &columns_of(t, a)?, &columns_of(t, b)?, &columns_of(t, c)?);
    run_test(&s, n_perm, seed)
}

fn run_test(s: &Strata, n_perm: usize, seed: u64) -> Result<PermutationTest> {
    if n_perm < 99 {
        return Err(Error::query("use at least 99 permutations"));
    }
    let statistic = s.statistic();
    if s.degenerate() {
        log::warn!("every conditioning stratum holds one trial; reporting p = 1");
        return Ok(PermutationTest { statistic, p_value: 1.0, degenerate: true });
    }
    let tol = 1e-12 * statistic.max(1.0);
    let hits: usize = (0..n_perm)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            usize::from(s.statistic_of(&s.permuted(&mut rng)) >= statistic - tol)
        })
        .sum();
    Ok(PermutationTest { statistic, p_value: (1 + hits) as f64 / (1 + n_perm) as f64, degenerate: false })
}

#[derive(Clone, Debug)]
pub struct SampledConfig {
    /// Family-wise level for one edge's cascade.
    pub alpha: f64,
    pub max_subset_size: usize,
    /// Permutations per test; `None` sizes it from the corrected level.
    pub n_perm: Option<usize>,
    pub seed: u64,
}

impl Default for SampledConfig {
    fn default() -> Self {
        SampledConfig { alpha: 0.01, max_subset_size: 2, n_perm: None, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeTest {
    pub conditioning: Vec<EdgeRef>,
    /// `None` when an earlier rejection ended the cascade.
    pub p_value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledVerdict {
    pub has_flow: bool,
    /// Per-test level after correction.
    pub level: f64,
    pub n_perm: usize,
    pub tests: Vec<CascadeTest>,
}

impl SampledVerdict {
    pub fn min_p_value(&self) -> Option<f64> {
        self.tests.iter().filter_map(|t| t.p_value).reduce(f64::min)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Test for flow on `edge` from trials: dependence on the message first,
/// then given each single other edge, then each pair, and so on. Every
/// test runs at `alpha / N` where `N` counts the whole cascade; the first
/// rejection decides.
///
/// Constant columns and columns duplicating another one in the sample are
/// left out of the conditioning candidates.
pub fn detect_flow_sampled(
    t: &TrialMatrix,
    message: &str,
    edge: &EdgeRef,
    config: &SampledConfig,
) -> Result<SampledVerdict> {
    let m = t.column(&VarId::message(message))?;
    let x = t.column(&VarId::Edge(edge.clone()))?;
    let slice: Vec<(usize, &EdgeRef)> = t
        .columns
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match c {
            VarId::Edge(e) if e.time() == edge.time() && e != edge => Some((i, e)),
            _ => None,
        })
        .collect();
    if config.max_subset_size > slice.len() {
        return Err(Error::query(format!(
            "conditioning sets of size {} need more than the {} other edges at time {}",
            config.max_subset_size,
            slice.len(),
            edge.time()
        )));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::query("alpha must lie strictly between 0 and 1"));
    }

    let mut cands: Vec<(usize, &EdgeRef)> = Vec::new();
    let mut seen: Vec<&Vec<u32>> = vec![&t.codes[x]];
    for (i, e) in slice {
        if t.is_constant(i) || seen.iter().any(|s| **s == t.codes[i]) {
            continue;
        }
        seen.push(&t.codes[i]);
        cands.push((i, e));
    }
    let depth = config.max_subset_size.min(cands.len());
    let total: usize = (0..=depth).map(|k| binomial(cands.len(), k)).sum();
    let level = config.alpha / total as f64;
    let n_perm = config.n_perm.unwrap_or_else(|| 999.max((4.0 / level).ceil() as usize - 1));

    let mut tests = Vec::with_capacity(total);
    let mut has_flow = false;
    let constant = t.is_constant(x);
    let mut index = 0u64;
    for k in 0..=depth {
        for combo in itertools::Itertools::combinations(cands.iter(), k) {
            let conditioning: Vec<EdgeRef> = combo.iter().map(|(_, e)| (*e).clone()).collect();
            let p_value = if has_flow {
                None
            } else if constant {
                Some(1.0)
            } else {
                let cols: Vec<usize> = combo.iter().map(|(i, _)| *i).collect();
                let s = strata(t, &[m], &[x], &cols);
                let seed = config.seed ^ (index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let p = run_test(&s, n_perm, seed)?.p_value;
                has_flow = p <= level;
                Some(p)
            };
            index += 1;
            tests.push(CascadeTest { conditioning, p_value });
        }
    }
    Ok(SampledVerdict { has_flow, level, n_perm, tests })
}

/// Sampled verdicts for every edge, as a flow report.
pub fn analyze_sampled(
    t: &TrialMatrix,
    graph: &UnrolledGraph,
    message: &str,
    config: &SampledConfig,
) -> Result<FlowReport> {
    let entries = graph
        .edges()
        .par_iter()
        .map(|e| {
            let mut c = config.clone();
            let available = graph.edges_at(e.time()).len() - 1;
            c.max_subset_size = c.max_subset_size.min(available);
            let v = detect_flow_sampled(t, message, e, &c)?;
            let witness = v
                .has_flow
                .then(|| v.tests.iter().rev().find(|x| x.p_value.is_some()).map(|x| x.conditioning.clone()))
                .flatten();
            Ok(EdgeEntry {
                edge: e.clone(),
                has_flow: v.has_flow,
                witness,
                quantified: None,
                p_value: v.min_p_value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlowReport::new(message, "sampled", graph, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn pad() -> SystemSpec {
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
    fn sampling_is_seeded_and_consistent() {
        let s = pad();
        let a = sample_trials(&s, 50, 3).unwrap();
        assert_eq!(a, sample_trials(&s, 50, 3).unwrap());
        assert!(a.is_consistent_with(&s).unwrap());
        assert_eq!(a.columns()[0], VarId::message("M"));
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("M,A0->A1,"));
        let back = TrialMatrix::read_csv(&buf[..]).unwrap();
        assert_eq!(back.rows(), a.rows());
    }

    #[test]
    fn plug_in_recovers_the_pad() {
        let t = sample_trials(&pad(), 10_000, 1).unwrap();
        let v = plug_in_cmi(&t, &[e("M")], &[e("A1->B2")], &[e("C1->B2")]).unwrap();
        assert!((v - 1.0).abs() < 0.05);
        assert_eq!(plug_in_cmi(&t, &[e("M")], &[e("A1->A2")], &[]).unwrap(), 0.0);
        assert!(plug_in_cmi(&t, &[e("M")], &[e("C1->B2")], &[]).unwrap() < 0.01);
    }

    #[test]
    fn permutation_test_levels() {
        let t = sample_trials(&pad(), 1000, 2).unwrap();
        let r = permutation_ci_test(&t, &[e("M")], &[e("A1->B2")], &[e("C1->B2")], 999, 5).unwrap();
        assert!(r.p_value <= 0.01);
        let q = permutation_ci_test(&t, &[e("M")], &[e("A1->A2")], &[], 99, 5).unwrap();
        assert_eq!(q.p_value, 1.0);
        assert!(permutation_ci_test(&t, &[e("M")], &[e("A1->B2")], &[], 10, 5).is_err());
    }

    #[test]
    fn cascade_finds_the_pad_edge_at_the_singleton_stage() {
        let t = sample_trials(&pad(), 10_000, 4).unwrap();
        let c = SampledConfig { alpha: 0.05, max_subset_size: 1, n_perm: Some(199), seed: 9 };
        let v = detect_flow_sampled(&t, "M", &"A1->B2".parse().unwrap(), &c).unwrap();
        assert!(v.has_flow);
        assert!(v.tests[0].p_value.unwrap() > v.level);
        assert!(v.tests[1].p_value.unwrap() <= v.level);
        let null = detect_flow_sampled(&t, "M", &"B1->A2".parse().unwrap(), &c).unwrap();
        assert!(!null.has_flow);
        assert!(null.tests.iter().all(|x| x.p_value == Some(1.0)));
        let too_deep = SampledConfig { max_subset_size: 9, ..c };
        assert!(detect_flow_sampled(&t, "M", &"A1->B2".parse().unwrap(), &too_deep).is_err());
    }
}
