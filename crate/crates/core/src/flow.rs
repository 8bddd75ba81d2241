//! Per-edge and per-set flow decisions.
//!
//! Information about a message flows on an edge when some set of other edges
//! at the same time, once conditioned on, makes the edge's transmission
//! dependent on the message. The search visits conditioning sets by
//! increasing size in canonical edge order and stops at the first witness.
//!
//! Before searching, constant edges are dropped (conditioning on a constant
//! changes nothing) and edges carrying the same information are collapsed to
//! their first member. Neither step changes any verdict or the first witness.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, NodeRef, UnrolledGraph};
use crate::joint::InfoMeasure;
use crate::report::{EdgeEntry, FlowReport, Partition};

/// Subsets checked when a silent set is too wide to verify exhaustively.
pub const SAMPLED_SUBSETS: usize = 4096;

/// Widest slice whose silent set is verified over every conditioning subset.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Clone, Debug)]
pub struct FlowConfig {
    /// Cap on conditioning candidates per slice after filtering.
    pub max_candidates: usize,
    /// Also compute quantified flow for every edge.
    pub quantify: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { max_candidates: 20, quantify: false }
    }
}

/// The simpler flow tests that the subset definition replaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Candidate {
    /// Marginal dependence only.
    Dependence,
    /// Marginal dependence, or dependence given one other edge.
    ConditionOnOne,
    /// Marginal dependence, or dependence given all other edges.
    ConditionOnAll,
}

impl TryFrom<u8> for Candidate {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Candidate::Dependence),
            2 => Ok(Candidate::ConditionOnOne),
            3 => Ok(Candidate::ConditionOnAll),
            _ => Err(Error::query(format!("unknown candidate definition {n}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub has_flow: bool,
    pub witness: Option<Vec<EdgeRef>>,
}

impl Verdict {
    fn none() -> Self {
        Verdict { has_flow: false, witness: None }
    }
}

/// Outcome of checking a partition against the separability conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionCheck {
    /// Flowing and silent sets are disjoint and cover the slice.
    pub covers_slice: bool,
    /// Every flowing edge has a witness made of other flowing edges.
    pub flowing_self_witnessed: bool,
    /// The silent set is independent of the message given any subset.
    pub silent_independent: bool,
    pub exhaustive: bool,
    pub subsets_checked: usize,
}

impl PartitionCheck {
    pub fn holds(&self) -> bool {
        self.covers_slice && self.flowing_self_witnessed && self.silent_independent
    }
}

struct Slice {
    edges: Vec<EdgeRef>,
    vars: Vec<usize>,
    /// Class of each edge (index into `reps`), `None` for constants.
    class: Vec<Option<usize>>,
    /// Position of each class's first edge.
    reps: Vec<usize>,
}

pub struct FlowDetector<'a, J: InfoMeasure + ?Sized> {
    joint: &'a J,
    graph: &'a UnrolledGraph,
    message: String,
    m: usize,
    config: FlowConfig,
    slices: Vec<Slice>,
}

impl<'a, J: InfoMeasure + ?Sized> FlowDetector<'a, J> {
    pub fn new(joint: &'a J, graph: &'a UnrolledGraph, message: &str, config: FlowConfig) -> Result<Self> {
        let m = joint.message_var(message)?;
        let slices = (0..graph.horizon())
            .map(|t| {
                let edges = graph.edges_at(t);
                let vars = edges.iter().map(|e| joint.edge_var(e)).collect::<Result<Vec<_>>>()?;
                let mut class = Vec::with_capacity(edges.len());
                let mut reps: Vec<usize> = Vec::new();
                for (i, &v) in vars.iter().enumerate() {
                    if joint.is_constant(v) {
                        class.push(None);
                    } else if let Some(k) = reps.iter().position(|&r| joint.same_information(vars[r], v)) {
                        class.push(Some(k));
                    } else {
                        class.push(Some(reps.len()));
                        reps.push(i);
                    }
                }
                Ok(Slice { edges, vars, class, reps })
            })
            .collect::<Result<_>>()?;
        Ok(FlowDetector { joint, graph, message: message.to_string(), m, config, slices })
    }

    pub fn message(&self) -> &str {
        &self.message
    }

    pub fn graph(&self) -> &UnrolledGraph {
        self.graph
    }

    fn slice(&self, t: usize) -> Result<&Slice> {
        self.slices
            .get(t)
            .ok_or_else(|| Error::query(format!("time {t} has no outgoing edges (horizon {})", self.graph.horizon())))
    }

    fn locate(&self, e: &EdgeRef) -> Result<(&Slice, usize)> {
        let s = self
            .slices
            .get(e.time())
            .ok_or_else(|| Error::UnknownVariable(e.to_string()))?;
        let i = s.edges.binary_search(e).map_err(|_| Error::UnknownVariable(e.to_string()))?;
        Ok((s, i))
    }

    fn dependent(&self, b: &[usize], c: &[usize]) -> Result<bool> {
        Ok(!self.joint.independent(&[self.m], b, c)?)
    }

    /// Representatives other than class `skip`, as slice positions.
    fn candidates(&self, s: &Slice, skip: Option<usize>) -> Result<Vec<usize>> {
        let out: Vec<usize> = s
            .reps
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != skip)
            .map(|(_, &pos)| pos)
            .collect();
        if out.len() > self.config.max_candidates {
            return Err(Error::SearchCapExceeded {
                time: s.edges.first().map_or(0, |e| e.time()),
                candidates: out.len(),
                cap: self.config.max_candidates,
            });
        }
        Ok(out)
    }

    /// First conditioning subset (by size, then canonical order) under which
    /// `target` depends on the message.
    fn search(&self, s: &Slice, target: &[usize], cands: &[usize]) -> Result<Option<Vec<EdgeRef>>> {
        for k in 0..=cands.len() {
            for combo in cands.iter().copied().combinations(k) {
                let c: Vec<usize> = combo.iter().map(|&p| s.vars[p]).collect();
                if self.dependent(target, &c)? {
                    return Ok(Some(combo.iter().map(|&p| s.edges[p].clone()).collect()));
                }
            }
        }
        Ok(None)
    }

    /// Whether information about the message flows on `e`, with the first
    /// witness found.
    pub fn edge_flow(&self, e: &EdgeRef) -> Result<Verdict> {
        let (s, i) = self.locate(e)?;
        let Some(class) = s.class[i] else {
            return Ok(Verdict::none());
        };
        let cands = self.candidates(s, Some(class))?;
        let witness = self.search(s, &[s.vars[i]], &cands)?;
        Ok(Verdict { has_flow: witness.is_some(), witness })
    }

    /// Whether information flows on a set of same-time edges; the witness is
    /// the conditioning set.
    pub fn set_flow(&self, edges: &[EdgeRef]) -> Result<Verdict> {
        let Some(first) = edges.first() else {
            return Ok(Verdict::none());
        };
        if edges.iter().any(|e| e.time() != first.time()) {
            return Err(Error::query("set flow needs edges from a single time"));
        }
        let mut target = Vec::new();
        for e in edges {
            let (s, i) = self.locate(e)?;
            if s.class[i].is_some() {
                target.push(s.vars[i]);
            }
        }
        if target.is_empty() {
            return Ok(Verdict::none());
        }
        let s = self.slice(first.time())?;
        let cands = self.candidates(s, None)?;
        let witness = self.search(s, &target, &cands)?;
        Ok(Verdict { has_flow: witness.is_some(), witness })
    }

    /// One of the rejected simpler definitions.
    pub fn candidate_flow(&self, e: &EdgeRef, which: Candidate) -> Result<bool> {
        let (s, i) = self.locate(e)?;
        let x = [s.vars[i]];
        if self.dependent(&x, &[])? {
            return Ok(true);
        }
        let others: Vec<usize> = (0..s.edges.len())
            .filter(|&k| k != i && s.class[k].is_some())
            .map(|k| s.vars[k])
            .collect();
        match which {
            Candidate::Dependence => Ok(false),
            Candidate::ConditionOnOne => {
                for &o in &others {
                    if self.dependent(&x, &[o])? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Candidate::ConditionOnAll => self.dependent(&x, &others),
        }
    }

    /// Largest conditional information over every conditioning subset.
    pub fn quantified_flow(&self, e: &EdgeRef) -> Result<f64> {
        let (s, i) = self.locate(e)?;
        let Some(class) = s.class[i] else {
            return Ok(0.0);
        };
        let cands = self.candidates(s, Some(class))?;
        let x = [s.vars[i]];
        let mut best = 0.0f64;
        for k in 0..=cands.len() {
            for combo in cands.iter().copied().combinations(k) {
                let c: Vec<usize> = combo.iter().map(|&p| s.vars[p]).collect();
                best = best.max(self.joint.cmi_bits(&[self.m], &x, &c)?);
                if best.is_infinite() {
                    return Ok(best);
                }
            }
        }
        Ok(best)
    }

    /// Whether the whole slice at `t` depends on the message.
    pub fn slice_carries_message(&self, t: usize) -> Result<bool> {
        let s = self.slice(t)?;
        self.dependent(&s.vars, &[])
    }

    /// Time-0 nodes whose outgoing transmissions depend on the message.
    pub fn input_nodes(&self) -> Result<BTreeSet<NodeRef>> {
        let mut out = BTreeSet::new();
        for v in self.graph.nodes_at(0) {
            let vars = self
                .graph
                .outgoing(&v)?
                .iter()
                .map(|e| self.joint.edge_var(e))
                .collect::<Result<Vec<_>>>()?;
            if !vars.is_empty() && self.dependent(&vars, &[])? {
                out.insert(v);
            }
        }
        Ok(out)
    }

    pub fn partition(&self, t: usize) -> Result<Partition> {
        let s = self.slice(t)?;
        let mut flowing = Vec::new();
        let mut silent = Vec::new();
        for e in &s.edges {
            if self.edge_flow(e)?.has_flow {
                flowing.push(e.clone());
            } else {
                silent.push(e.clone());
            }
        }
        Ok(Partition { time: t, flowing, silent })
    }

    /// Check a partition against the separability conditions. Silent sets are
    /// checked against every subset of the non-constant edges when there are
    /// at most [`EXHAUSTIVE_LIMIT`] of them, otherwise against
    /// [`SAMPLED_SUBSETS`] random subsets.
    pub fn verify_partition(&self, p: &Partition, seed: u64) -> Result<PartitionCheck> {
        let s = self.slice(p.time)?;
        let flowing: BTreeSet<&EdgeRef> = p.flowing.iter().collect();
        let silent: BTreeSet<&EdgeRef> = p.silent.iter().collect();
        let covers_slice = flowing.is_disjoint(&silent)
            && flowing.len() + silent.len() == s.edges.len()
            && s.edges.iter().all(|e| flowing.contains(e) || silent.contains(e));

        let mut flowing_self_witnessed = true;
        for r in &p.flowing {
            let (_, i) = self.locate(r)?;
            let Some(class) = s.class[i] else {
                flowing_self_witnessed = false;
                break;
            };
            let cands: Vec<usize> = s
                .reps
                .iter()
                .enumerate()
                .filter(|&(k, &pos)| k != class && flowing.contains(&s.edges[pos]))
                .map(|(_, &pos)| pos)
                .collect();
            if cands.len() > self.config.max_candidates {
                return Err(Error::SearchCapExceeded {
                    time: p.time,
                    candidates: cands.len(),
                    cap: self.config.max_candidates,
                });
            }
            if self.search(s, &[s.vars[i]], &cands)?.is_none() {
                flowing_self_witnessed = false;
                break;
            }
        }

        let nonconst: Vec<usize> = (0..s.edges.len()).filter(|&k| s.class[k].is_some()).collect();
        let silent_pos: BTreeSet<usize> = nonconst
            .iter()
            .copied()
            .filter(|&k| silent.contains(&s.edges[k]))
            .collect();
        let check = |subset: &[usize]| -> Result<bool> {
            let given: BTreeSet<usize> = subset.iter().copied().collect();
            let b: Vec<usize> = silent_pos.difference(&given).map(|&k| s.vars[k]).collect();
            if b.is_empty() {
                return Ok(true);
            }
            let c: Vec<usize> = subset.iter().map(|&k| s.vars[k]).collect();
            Ok(!self.dependent(&b, &c)?)
        };
        let exhaustive = nonconst.len() <= EXHAUSTIVE_LIMIT;
        let mut silent_independent = true;
        let mut subsets_checked = 0;
        if !silent_pos.is_empty() {
            if exhaustive {
                'outer: for k in 0..=nonconst.len() {
                    for combo in nonconst.iter().copied().combinations(k) {
                        subsets_checked += 1;
                        if !check(&combo)? {
                            silent_independent = false;
                            break 'outer;
                        }
                    }
                }
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..SAMPLED_SUBSETS {
                    let k = rng.random_range(0..=nonconst.len());
                    let mut combo: Vec<usize> =
                        sample(&mut rng, nonconst.len(), k).iter().map(|i| nonconst[i]).collect();
                    combo.sort_unstable();
                    subsets_checked += 1;
                    if !check(&combo)? {
                        silent_independent = false;
                        break;
                    }
                }
            }
        }
        Ok(PartitionCheck { covers_slice, flowing_self_witnessed, silent_independent, exhaustive, subsets_checked })
    }

    /// Decide every edge of the graph. Edges are processed in parallel; the
    /// report is ordered canonically.
    pub fn analyze(&self) -> Result<FlowReport> {
        let edges: Vec<EdgeRef> = self.slices.iter().flat_map(|s| s.edges.iter().cloned()).collect();
        let entries = edges
            .par_iter()
            .map(|e| {
                let v = self.edge_flow(e)?;
                let quantified = if self.config.quantify { Some(self.quantified_flow(e)?) } else { None };
                Ok(EdgeEntry { edge: e.clone(), has_flow: v.has_flow, witness: v.witness, quantified, p_value: None })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FlowReport::new(&self.message, self.joint.engine_name(), self.graph, entries))
    }

    /// A report that uses one of the simpler definitions instead.
    pub fn candidate_report(&self, which: Candidate) -> Result<FlowReport> {
        let edges: Vec<EdgeRef> = self.slices.iter().flat_map(|s| s.edges.iter().cloned()).collect();
        let entries = edges
            .par_iter()
            .map(|e| {
                Ok(EdgeEntry {
                    edge: e.clone(),
                    has_flow: self.candidate_flow(e, which)?,
                    witness: None,
                    quantified: None,
                    p_value: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FlowReport::new(&self.message, &format!("candidate-{which:?}"), self.graph, entries))
    }
}

/// Analyze every message of a joint. A warning is attached when two
/// messages are dependent.
pub fn analyze_messages<J: InfoMeasure + ?Sized>(
    joint: &J,
    graph: &UnrolledGraph,
    config: &FlowConfig,
) -> Result<Vec<FlowReport>> {
    let names = joint.message_names();
    let mut warnings = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let (x, y) = (joint.message_var(a)?, joint.message_var(b)?);
            if !joint.independent(&[x], &[y], &[])? {
                let bits = joint.cmi_bits(&[x], &[y], &[])?;
                warnings.push(format!("messages {a} and {b} are dependent (I = {bits:.4} bits); flows may overlap"));
            }
        }
    }
    names
        .iter()
        .map(|m| {
            let mut r = FlowDetector::new(joint, graph, m, config.clone())?.analyze()?;
            r.warnings.extend(warnings.iter().cloned());
            Ok(r)
        })
        .collect()
}

/// Nodes that send flow without receiving any. Time-0 nodes have no incoming
/// edges and are not counted.
pub fn find_orphans(report: &FlowReport, graph: &UnrolledGraph) -> BTreeSet<NodeRef> {
    let mut out = BTreeSet::new();
    for t in 1..graph.horizon() {
        for v in graph.nodes_at(t) {
            let sends = graph.outgoing(&v).unwrap_or_default().iter().any(|e| report.has_flow(e));
            let receives = graph.incoming(&v).unwrap_or_default().iter().any(|e| report.has_flow(e));
            if sends && !receives {
                out.insert(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::joint::enumerate_joint;
    use crate::system::{Law, SystemSpec};

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

    #[test]
    fn masked_edge_has_a_single_witness() {
        let s = pad();
        let j = enumerate_joint(&s).unwrap();
        let d = FlowDetector::new(&j, &s.graph, "M", FlowConfig::default()).unwrap();
        let v = d.edge_flow(&EdgeRef::at("A", "B", 1)).unwrap();
        assert!(v.has_flow);
        assert_eq!(v.witness, Some(vec![EdgeRef::at("C", "B", 1)]));
        assert!(d.edge_flow(&EdgeRef::at("C", "B", 1)).unwrap().has_flow);
        assert!(!d.edge_flow(&EdgeRef::at("B", "A", 1)).unwrap().has_flow);
        assert!((d.quantified_flow(&EdgeRef::at("A", "B", 1)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(d.quantified_flow(&EdgeRef::at("B", "A", 1)).unwrap(), 0.0);
        assert!(d.edge_flow(&EdgeRef::at("A", "B", 3)).is_err());
    }

    #[test]
    fn set_flow_on_the_pair_needs_no_conditioning() {
        let s = pad();
        let j = enumerate_joint(&s).unwrap();
        let d = FlowDetector::new(&j, &s.graph, "M", FlowConfig::default()).unwrap();
        let v = d.set_flow(&[EdgeRef::at("A", "B", 1), EdgeRef::at("C", "B", 1)]).unwrap();
        assert_eq!(v, Verdict { has_flow: true, witness: Some(vec![]) });
        assert!(!d.set_flow(&[]).unwrap().has_flow);
        assert!(d.set_flow(&[EdgeRef::at("A", "B", 1), EdgeRef::at("A", "A", 0)]).is_err());
    }

    #[test]
    fn search_cap_is_enforced() {
        let s = pad();
        let j = enumerate_joint(&s).unwrap();
        let d = FlowDetector::new(&j, &s.graph, "M", FlowConfig { max_candidates: 0, quantify: false }).unwrap();
        assert!(matches!(
            d.edge_flow(&EdgeRef::at("A", "B", 1)),
            Err(Error::SearchCapExceeded { .. })
        ));
    }

    #[test]
    fn orphan_and_inputs() {
        let s = pad();
        let j = enumerate_joint(&s).unwrap();
        let d = FlowDetector::new(&j, &s.graph, "M", FlowConfig::default()).unwrap();
        let r = d.analyze().unwrap();
        assert_eq!(find_orphans(&r, &s.graph), BTreeSet::from([NodeRef::new("C", 1)]));
        assert_eq!(d.input_nodes().unwrap(), BTreeSet::from([NodeRef::new("A", 0)]));
        assert!(Candidate::try_from(4).is_err());
    }
}
