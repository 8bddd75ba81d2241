//! Complete directed graphs and their time-unrolled form.
//!
//! A base graph has a node set and an allowed edge set (all ordered pairs,
//! self-edges included, unless a sparse adjacency is given). Unrolling over a
//! horizon `T` makes one copy of every node per time `0..=T` and connects
//! `A_t -> B_{t+1}` for every allowed base edge `(A, B)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A node copy `name` at `time`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef {
    pub name: String,
    pub time: usize,
}

impl NodeRef {
    pub fn new(name: impl Into<String>, time: usize) -> Self {
        NodeRef { name: name.into(), time }
    }
}

/// Names that end in a digit are written `name@t` so the label stays unambiguous.
impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.name.ends_with(|c: char| c.is_ascii_digit()) {
            write!(f, "{}@{}", self.name, self.time)
        } else {
            write!(f, "{}{}", self.name, self.time)
        }
    }
}

impl FromStr for NodeRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, time) = match s.rsplit_once('@') {
            Some((name, time)) => (name, time),
            None => {
                let split = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
                s.split_at(split)
            }
        };
        if name.is_empty() || time.is_empty() {
            return Err(Error::Parse(format!("bad node label {s:?} (expected e.g. A0 or X1@2)")));
        }
        let time = time
            .parse()
            .map_err(|_| Error::Parse(format!("bad time in node label {s:?}")))?;
        Ok(NodeRef::new(name, time))
    }
}

/// A transmission slot `src -> dst` between consecutive times.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeRef {
    pub src: NodeRef,
    pub dst: NodeRef,
}

impl EdgeRef {
    pub fn new(src: NodeRef, dst: NodeRef) -> Self {
        EdgeRef { src, dst }
    }

    /// `(src_name, dst_name)` leaving at time `t`.
    pub fn at(src: &str, dst: &str, t: usize) -> Self {
        EdgeRef::new(NodeRef::new(src, t), NodeRef::new(dst, t + 1))
    }

    pub fn time(&self) -> usize {
        self.src.time
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.src, self.dst)
    }
}

impl FromStr for EdgeRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("->")
            .ok_or_else(|| Error::Parse(format!("bad edge label {s:?} (expected A0->B1)")))?;
        Ok(EdgeRef::new(a.parse()?, b.parse()?))
    }
}

macro_rules! label_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

label_serde!(NodeRef);
label_serde!(EdgeRef);

/// The unrolled graph. Node names are kept sorted so that index order and
/// label order agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnrolledGraph {
    names: Vec<String>,
    horizon: usize,
    adjacency: BTreeSet<(usize, usize)>,
}

impl UnrolledGraph {
    /// Complete base graph (every ordered pair, self-edges included).
    pub fn complete<S: AsRef<str>>(names: &[S], horizon: usize) -> Result<Self> {
        let names = names.iter().map(|s| s.as_ref().to_string()).collect();
        Self::unroll(names, horizon, None)
    }

    /// Unroll a base graph. `adjacency = None` means complete.
    pub fn unroll(
        names: Vec<String>,
        horizon: usize,
        adjacency: Option<Vec<(String, String)>>,
    ) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::invalid("node list is empty"));
        }
        if horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        for n in &names {
            if n.is_empty() || n.contains(['@', ' ', '\t', '\n']) || n.contains("->") {
                return Err(Error::invalid(format!("bad node name {n:?}")));
            }
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::invalid("duplicate node names"));
        }
        let index = |n: &str| -> Result<usize> {
            sorted
                .binary_search_by(|x| x.as_str().cmp(n))
                .map_err(|_| Error::invalid(format!("adjacency mentions unknown node {n:?}")))
        };
        let adjacency = match adjacency {
            None => (0..sorted.len())
                .flat_map(|a| (0..sorted.len()).map(move |b| (a, b)))
                .collect(),
            Some(pairs) => pairs
                .iter()
                .map(|(a, b)| Ok((index(a)?, index(b)?)))
                .collect::<Result<BTreeSet<_>>>()?,
        };
        Ok(UnrolledGraph { names: sorted, horizon, adjacency })
    }

    pub fn node_names(&self) -> &[String] {
        &self.names
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn has_name(&self, name: &str) -> bool {
        self.name_index(name).is_some()
    }

    pub(crate) fn name_index(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|x| x.as_str().cmp(name)).ok()
    }

    pub fn is_complete(&self) -> bool {
        self.adjacency.len() == self.names.len() * self.names.len()
    }

    /// Allowed base edges as name pairs, sorted.
    pub fn base_edges(&self) -> Vec<(String, String)> {
        self.adjacency
            .iter()
            .map(|&(a, b)| (self.names[a].clone(), self.names[b].clone()))
            .collect()
    }

    pub fn base_edge_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn allows(&self, src: &str, dst: &str) -> bool {
        match (self.name_index(src), self.name_index(dst)) {
            (Some(a), Some(b)) => self.adjacency.contains(&(a, b)),
            _ => false,
        }
    }

    pub fn contains_node(&self, v: &NodeRef) -> bool {
        v.time <= self.horizon && self.has_name(&v.name)
    }

    pub fn contains_edge(&self, e: &EdgeRef) -> bool {
        e.dst.time == e.src.time + 1
            && e.dst.time <= self.horizon
            && self.allows(&e.src.name, &e.dst.name)
    }

    /// All nodes sorted by `(name, time)`.
    pub fn nodes(&self) -> Vec<NodeRef> {
        self.names
            .iter()
            .flat_map(|n| (0..=self.horizon).map(move |t| NodeRef::new(n.clone(), t)))
            .collect()
    }

    pub fn nodes_at(&self, t: usize) -> Vec<NodeRef> {
        self.names.iter().map(|n| NodeRef::new(n.clone(), t)).collect()
    }

    /// All edges sorted by `(src, dst)`.
    pub fn edges(&self) -> Vec<EdgeRef> {
        let mut out: Vec<EdgeRef> = (0..self.horizon).flat_map(|t| self.edges_at(t)).collect();
        out.sort();
        out
    }

    /// The edge set leaving time `t`, sorted by `(src, dst)`.
    pub fn edges_at(&self, t: usize) -> Vec<EdgeRef> {
        if t >= self.horizon {
            return Vec::new();
        }
        self.adjacency
            .iter()
            .map(|&(a, b)| EdgeRef::at(&self.names[a], &self.names[b], t))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len() * self.horizon
    }

    /// Edges entering `v`; empty exactly when `v` is at time 0.
    pub fn incoming(&self, v: &NodeRef) -> Result<Vec<EdgeRef>> {
        let b = self.check_node(v)?;
        if v.time == 0 {
            return Ok(Vec::new());
        }
        Ok(self
            .adjacency
            .iter()
            .filter(|&&(_, d)| d == b)
            .map(|&(a, _)| EdgeRef::new(NodeRef::new(self.names[a].clone(), v.time - 1), v.clone()))
            .collect())
    }

    /// Edges leaving `v`; empty exactly when `v` is at the horizon.
    pub fn outgoing(&self, v: &NodeRef) -> Result<Vec<EdgeRef>> {
        let a = self.check_node(v)?;
        if v.time == self.horizon {
            return Ok(Vec::new());
        }
        Ok(self
            .adjacency
            .range((a, 0)..(a + 1, 0))
            .map(|&(_, b)| EdgeRef::new(v.clone(), NodeRef::new(self.names[b].clone(), v.time + 1)))
            .collect())
    }

    fn check_node(&self, v: &NodeRef) -> Result<usize> {
        match self.name_index(&v.name) {
            Some(i) if v.time <= self.horizon => Ok(i),
            _ => Err(Error::query(format!("node {v} is not in the graph"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> NodeRef {
        s.parse().unwrap()
    }

    #[test]
    fn three_node_complete_unrolling() {
        let g = UnrolledGraph::complete(&["A", "B", "C"], 2).unwrap();
        assert_eq!(g.nodes().len(), 9);
        assert_eq!(g.edges().len(), 18);
        assert_eq!(g.edges_at(0).len(), 9);
        assert_eq!(g.edges_at(1).len(), 9);
        assert!(g.edges_at(2).is_empty());
    }

    #[test]
    fn single_node_has_only_its_memory_edge() {
        let g = UnrolledGraph::complete(&["A"], 1).unwrap();
        assert_eq!(g.nodes().len(), 2);
        assert_eq!(g.edges(), vec![EdgeRef::at("A", "A", 0)]);
    }

    #[test]
    fn sparse_adjacency_counts() {
        let adj = vec![("A".into(), "B".into()), ("A".into(), "A".into()), ("B".into(), "B".into())];
        let g = UnrolledGraph::unroll(vec!["A".into(), "B".into()], 3, Some(adj)).unwrap();
        assert_eq!(g.nodes().len(), 8);
        assert_eq!(g.edges().len(), 9);
    }

    #[test]
    fn construction_errors() {
        assert!(UnrolledGraph::complete::<&str>(&[], 2).is_err());
        assert!(UnrolledGraph::complete(&["A", "A"], 2).is_err());
        assert!(UnrolledGraph::complete(&["A"], 0).is_err());
    }

    #[test]
    fn fan_in_and_fan_out() {
        let g = UnrolledGraph::complete(&["A", "B", "C"], 2).unwrap();
        let inc = g.incoming(&n("B1")).unwrap();
        assert_eq!(inc, vec![EdgeRef::at("A", "B", 0), EdgeRef::at("B", "B", 0), EdgeRef::at("C", "B", 0)]);
        assert!(g.incoming(&n("A0")).unwrap().is_empty());
        let out = g.outgoing(&n("C0")).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|e| e.src == n("C0") && e.dst.time == 1));
        assert!(g.outgoing(&n("A2")).unwrap().is_empty());
        assert!(g.outgoing(&n("A1")).unwrap().contains(&EdgeRef::at("A", "A", 1)));
        assert!(g.incoming(&n("D1")).is_err());
        assert!(g.outgoing(&n("A3")).is_err());
    }

    #[test]
    fn sparse_fan_in() {
        let g = UnrolledGraph::unroll(
            vec!["A".into(), "B".into()],
            2,
            Some(vec![("A".into(), "B".into())]),
        )
        .unwrap();
        assert_eq!(g.incoming(&n("B1")).unwrap(), vec![EdgeRef::at("A", "B", 0)]);
        assert!(g.incoming(&n("A1")).unwrap().is_empty());
    }

    #[test]
    fn labels_round_trip() {
        for s in ["A0", "Bob12", "Y2-out3", "X1@4"] {
            assert_eq!(n(s).to_string(), s);
        }
        assert_eq!(n("X1@4"), NodeRef::new("X1", 4));
        let e: EdgeRef = "A1->B2".parse().unwrap();
        assert_eq!(e, EdgeRef::at("A", "B", 1));
        assert_eq!(e.to_string(), "A1->B2");
        assert!("A->B".parse::<EdgeRef>().is_err());
    }

    #[test]
    fn incidence_partitions_edges() {
        let g = UnrolledGraph::complete(&["A", "B", "C"], 3).unwrap();
        for e in g.edges() {
            assert!(g.incoming(&e.dst).unwrap().contains(&e));
            assert!(g.outgoing(&e.src).unwrap().contains(&e));
        }
        for v in g.nodes() {
            assert!(g.incoming(&v).unwrap().iter().all(|e| e.dst == v));
            assert!(g.outgoing(&v).unwrap().iter().all(|e| e.src == v));
        }
    }
}
