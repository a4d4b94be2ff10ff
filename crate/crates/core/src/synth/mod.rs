//! Deterministic synthetic datasets with a verified structural property.
//!
//! Every generator draws from `ChaCha8Rng` seeded with the generator's
//! `rng_seed`, so identical specs give identical datasets on every
//! platform. Outputs are only comparable across implementations using the
//! same RNG algorithm; the algorithm name is written into the metadata.

mod community;
mod ksparse;
mod zipf;

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use indexmap::IndexSet;
use thiserror::Error;

use crate::graph::{Graph, GraphError, SeedSet};
use crate::metrics::MetricsError;
use crate::solver::SolverError;

pub use community::{gen_community, CommunitySpec};
pub use ksparse::{gen_ksparse, KSparseSpec};
pub use zipf::{gen_zipf, ZipfSpec};

pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid {field}: {reason}")]
    InvalidSpec { field: &'static str, reason: String },
    #[error("infeasible spec: {0}")]
    Infeasible(String),
    #[error("requested psi {target} is unreachable; achievable psi is {achievable}")]
    UnreachablePsi { target: f64, achievable: f64 },
    #[error("generated dataset failed verification: {0}")]
    Verification(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> SynthError {
    SynthError::InvalidSpec { field, reason: reason.into() }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SynthSpec {
    KSparse(KSparseSpec),
    Zipf(ZipfSpec),
    Community(CommunitySpec),
}

impl SynthSpec {
    pub fn generate(&self) -> Result<Dataset, SynthError> {
        match self {
            SynthSpec::KSparse(s) => gen_ksparse(s),
            SynthSpec::Zipf(s) => gen_zipf(s),
            SynthSpec::Community(s) => gen_community(s),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub graph: Graph,
    pub seeds: SeedSet,
    /// `(node, label)` ground truth from the planted structure.
    pub gold: Vec<(usize, u32)>,
    /// Unseeded nodes that carry a gold label.
    pub eval_nodes: Vec<usize>,
    /// Community generator only: the node blocks.
    pub blocks: Option<Vec<Vec<usize>>>,
    /// Ordered `key=value` pairs: generator, parameters, RNG, verified properties.
    pub meta: Vec<(String, String)>,
}

impl Dataset {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Writes `edges.tsv`, `seeds.tsv`, `gold.tsv`, `eval.txt` and
    /// `meta.txt` (plus `blocks.tsv` for community datasets) into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), SynthError> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let write = |name: &str, f: &dyn Fn(&mut dyn Write) -> io::Result<()>| {
            let path = dir.join(name);
            let file = File::create(&path).map_err(|e| io_err(&path, e))?;
            let mut out = BufWriter::new(file);
            f(&mut out).and_then(|_| out.flush()).map_err(|e| io_err(&path, e))
        };
        write("edges.tsv", &|out| self.graph.write_edges(out))?;
        write("seeds.tsv", &|out| self.write_seeds(out))?;
        write("gold.tsv", &|out| self.write_gold(out))?;
        write("eval.txt", &|out| {
            for &v in &self.eval_nodes {
                writeln!(out, "{}", self.graph.node_name(v))?;
            }
            Ok(())
        })?;
        write("meta.txt", &|out| {
            for (k, v) in &self.meta {
                writeln!(out, "{k}={v}")?;
            }
            Ok(())
        })?;
        if let Some(blocks) = &self.blocks {
            write("blocks.tsv", &|out| {
                for (b, nodes) in blocks.iter().enumerate() {
                    for &v in nodes {
                        writeln!(out, "{}\t{b}", self.graph.node_name(v))?;
                    }
                }
                Ok(())
            })?;
        }
        Ok(())
    }

    pub fn write_seeds(&self, out: &mut dyn Write) -> io::Result<()> {
        for &(v, l, s) in self.seeds.entries() {
            let label = self.seeds.label_name(l).unwrap_or_default();
            writeln!(out, "{}\t{label}\t{s}", self.graph.node_name(v))?;
        }
        Ok(())
    }

    pub fn write_gold(&self, out: &mut dyn Write) -> io::Result<()> {
        for &(v, l) in &self.gold {
            let label = self.seeds.label_name(l).unwrap_or_default();
            writeln!(out, "{}\t{label}", self.graph.node_name(v))?;
        }
        Ok(())
    }
}

fn io_err(path: &Path, source: io::Error) -> SynthError {
    SynthError::Io { path: path.display().to_string(), source }
}

pub(crate) fn node_names(n: usize) -> IndexSet<String> {
    (0..n).map(|v| format!("n{v}")).collect()
}

pub(crate) fn label_names(m: usize) -> IndexSet<String> {
    (0..m).map(|l| format!("c{l}")).collect()
}

/// Contiguous partition of `0..n` into `parts` near-equal ranges.
pub(crate) fn partition(n: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    (0..parts).map(|c| c * n / parts..(c + 1) * n / parts).collect()
}

/// Undirected unit-weight edge set without duplicates or self-loops.
#[derive(Default)]
pub(crate) struct EdgeSet {
    seen: HashSet<(usize, usize)>,
    pub(crate) edges: Vec<(usize, usize, f64)>,
}

impl EdgeSet {
    pub(crate) fn insert(&mut self, u: usize, v: usize, w: f64) -> bool {
        if u == v || !self.seen.insert((u.min(v), u.max(v))) {
            return false;
        }
        self.edges.push((u, v, w));
        true
    }

    pub(crate) fn len(&self) -> usize {
        self.edges.len()
    }
}

/// Whether every node reaches node 0.
pub(crate) fn is_connected(g: &Graph) -> bool {
    let n = g.node_count();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for (u, _) in g.neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

pub(crate) fn cluster_gold(clusters: &[std::ops::Range<usize>]) -> Vec<(usize, u32)> {
    clusters.iter().enumerate().flat_map(|(c, r)| r.clone().map(move |v| (v, c as u32))).collect()
}

pub(crate) fn meta(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_covers_range() {
        let parts = partition(10, 3);
        assert_eq!(parts, vec![0..3, 3..6, 6..10]);
    }

    #[test]
    fn edge_set_dedups() {
        let mut e = EdgeSet::default();
        assert!(e.insert(0, 1, 1.0));
        assert!(!e.insert(1, 0, 1.0));
        assert!(!e.insert(2, 2, 1.0));
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn written_files_reload() {
        let spec = KSparseSpec { n: 40, m: 4, k: 2, seeds_per_label: 2, ..KSparseSpec::default() };
        let ds = gen_ksparse(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        ds.write_to(dir.path()).unwrap();
        let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
        let g = crate::graph::load_edges(&read("edges.tsv")[..], true).unwrap();
        assert_eq!(g.node_count(), 40);
        assert_eq!(g.entry_count(), ds.graph.entry_count());
        let seeds = crate::graph::load_seeds(&read("seeds.tsv")[..], &g).unwrap();
        assert_eq!(seeds.entries().len(), ds.seeds.entries().len());
        assert_eq!(seeds.k_sparsity(), 2.0);
        let gold = crate::graph::load_gold(&read("gold.tsv")[..], &g, seeds.labels()).unwrap();
        assert_eq!(gold.pairs.len(), 40);
        let eval = crate::graph::load_node_list(&read("eval.txt")[..], &g).unwrap();
        assert_eq!(eval, ds.eval_nodes);
        let meta = String::from_utf8(read("meta.txt")).unwrap();
        assert!(meta.contains("rng=chacha8\n"));
        assert!(meta.contains("generator=ksparse\n"));
    }
}
