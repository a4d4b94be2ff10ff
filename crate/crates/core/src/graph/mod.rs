//! Graphs, seed labelings and the per-node quantities Modified Adsorption
//! derives from them.
//!
//! Node ids are dense `0..n` in order of first appearance; names are kept
//! in an interning table so results can be written back out by name.

mod conductance;
mod io;
mod labels;
mod weights;

use std::io::Write;

use indexmap::IndexSet;
use thiserror::Error;

pub use conductance::{conductance, max_conductance, ConductanceWeights};
pub use io::{load_edges, load_gold, load_node_list, load_seeds, read_records, GoldLabels};
pub use labels::{LabelDist, SeedSet};
pub use weights::{build_weights, NodeProbabilities, PropagationWeights, WeightMode};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("negative edge weight {weight} between {src} and {dst}")]
    NegativeWeight { src: String, dst: String, weight: f64 },
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("node id {id} out of range for a graph of {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },
    #[error("invalid parameter {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("node {node:?} has M_vv = 0; use mu3 > 0 or seed it (mu1 > 0)")]
    ZeroNormalizer { node: String },
    #[error("seed set is {found}-sparse, exceeding the declared k = {declared}")]
    NotKSparse { declared: f64, found: f64 },
    #[error("conductance undefined: {0}")]
    Conductance(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Compressed sparse rows with columns sorted ascending inside every row.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Csr {
    pub(crate) offsets: Vec<usize>,
    pub(crate) columns: Vec<u32>,
    pub(crate) values: Vec<f64>,
}

impl Csr {
    /// Builds from unordered triplets; duplicate `(row, col)` entries are
    /// summed in input order.
    pub(crate) fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, f64)>) -> Self {
        // Stable sort keeps the input order of duplicates, so sums are
        // reproducible.
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut offsets = vec![0usize; n + 1];
        let mut columns = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                columns.push(c);
                values.push(v);
                offsets[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Self { offsets, columns, values }
    }

    #[inline]
    pub(crate) fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.offsets[r], self.offsets[r + 1]);
        (&self.columns[a..b], &self.values[a..b])
    }

    pub(crate) fn row_sum(&self, r: usize) -> f64 {
        self.row(r).1.iter().sum()
    }

    pub(crate) fn nnz(&self) -> usize {
        self.columns.len()
    }
}

/// An immutable weighted graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    names: IndexSet<String>,
    adjacency: Csr,
    degrees: Vec<f64>,
    undirected: bool,
}

impl Graph {
    /// Builds a graph over nodes `0..names.len()`. In undirected mode every
    /// edge is stored in both directions. Duplicates are summed; self-loops
    /// are dropped with a warning.
    pub fn from_named_edges<I>(names: IndexSet<String>, edges: I, undirected: bool) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = names.len();
        let mut triplets = Vec::new();
        let mut self_loops = 0usize;
        for (u, v, w) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(GraphError::NodeOutOfRange { id, n });
                }
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(GraphError::NegativeWeight {
                    src: names[u].clone(),
                    dst: names[v].clone(),
                    weight: w,
                });
            }
            if u == v {
                self_loops += 1;
                continue;
            }
            triplets.push((u as u32, v as u32, w));
            if undirected {
                triplets.push((v as u32, u as u32, w));
            }
        }
        if self_loops > 0 {
            log::warn!("dropped {self_loops} self-loop(s)");
        }
        let adjacency = Csr::from_triplets(n, triplets);
        let degrees = (0..n).map(|v| adjacency.row_sum(v)).collect();
        Ok(Self { names, adjacency, degrees, undirected })
    }

    /// A graph whose nodes are named by their ids (`"0"`, `"1"`, ...).
    pub fn from_edges<I>(n: usize, edges: I, undirected: bool) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        Self::from_named_edges((0..n).map(|i| i.to_string()).collect(), edges, undirected)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    /// Number of stored directed adjacency entries.
    pub fn entry_count(&self) -> usize {
        self.adjacency.nnz()
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    /// Neighbour ids of `v` (ascending) and the matching weights `W_vu`.
    pub fn row(&self, v: usize) -> (&[u32], &[f64]) {
        self.adjacency.row(v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (cols, vals) = self.row(v);
        cols.iter().zip(vals).map(|(&u, &w)| (u as usize, w))
    }

    /// `D_vv = Σ_u W_vu`.
    pub fn degree(&self, v: usize) -> f64 {
        self.degrees[v]
    }

    pub fn total_volume(&self) -> f64 {
        self.degrees.iter().sum()
    }

    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.names.get_index_of(name)
    }

    pub fn node_name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &IndexSet<String> {
        &self.names
    }

    /// Adds every reverse edge, summing with any existing one.
    pub fn symmetrized(&self) -> Self {
        if self.undirected {
            return self.clone();
        }
        let edges: Vec<_> = (0..self.node_count())
            .flat_map(|v| self.neighbors(v).map(move |(u, w)| (v, u, w)))
            .collect();
        Self::from_named_edges(self.names.clone(), edges, true).expect("weights already validated")
    }

    /// Writes the graph in the edge-list format accepted by
    /// [`load_edges`]: every node name on its own line (so ids and isolated
    /// nodes survive a round trip), then one `src\tdst\tweight` line per
    /// edge. Undirected edges are written once.
    pub fn write_edges<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for name in &self.names {
            writeln!(out, "{name}")?;
        }
        for v in 0..self.node_count() {
            for (u, w) in self.neighbors(v) {
                if self.undirected && u < v {
                    continue;
                }
                writeln!(out, "{}\t{}\t{}", self.names[v], self.names[u], w)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_sums_duplicates_and_sorts() {
        let csr = Csr::from_triplets(3, vec![(0, 2, 1.0), (0, 1, 2.0), (0, 2, 0.5), (2, 0, 3.0)]);
        assert_eq!(csr.row(0), (&[1u32, 2][..], &[2.0, 1.5][..]));
        assert_eq!(csr.row(1).0.len(), 0);
        assert_eq!(csr.row(2), (&[0u32][..], &[3.0][..]));
        assert_eq!(csr.offsets.len(), 4);
    }

    #[test]
    fn degrees_match_row_sums() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 2.5), (2, 3, 0.25), (0, 3, 4.0)], true).unwrap();
        for v in 0..4 {
            let s: f64 = g.row(v).1.iter().sum();
            assert_eq!(g.degree(v), s);
        }
        assert_eq!(g.degree(0), 5.0);
    }

    #[test]
    fn self_loops_are_dropped() {
        let g = Graph::from_edges(2, [(0, 0, 1.0), (0, 1, 1.0)], true).unwrap();
        assert_eq!(g.entry_count(), 2);
        assert_eq!(g.degree(0), 1.0);
    }

    #[test]
    fn symmetrize_directed() {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 0, 2.0), (1, 2, 1.0)], false).unwrap();
        let s = g.symmetrized();
        assert!(s.is_undirected());
        assert_eq!(s.neighbors(0).collect::<Vec<_>>(), vec![(1, 3.0)]);
        assert_eq!(s.neighbors(2).collect::<Vec<_>>(), vec![(1, 1.0)]);
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(matches!(
            Graph::from_edges(2, [(0, 1, -1.0)], true),
            Err(GraphError::NegativeWeight { .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 5, 1.0)], true),
            Err(GraphError::NodeOutOfRange { id: 5, n: 2 })
        ));
    }
}
