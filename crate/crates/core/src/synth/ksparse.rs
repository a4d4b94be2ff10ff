use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, SeedSet};

use super::{cluster_gold, invalid, is_connected, label_names, meta, node_names, partition, Dataset, EdgeSet, SynthError, RNG_ALGORITHM};

/// One planted cluster per label. Each label is seeded on nodes of its own
/// cluster; when `k > 1` a few nodes additionally seed the next `k − 1`
/// labels so the seed matrix is exactly `k`-sparse.
#[derive(Clone, Debug, PartialEq)]
pub struct KSparseSpec {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seeds_per_label: usize,
    pub mean_degree: f64,
    /// Fraction of random edges that cross clusters.
    pub inter_fraction: f64,
    pub rng_seed: u64,
}

impl Default for KSparseSpec {
    fn default() -> Self {
        Self { n: 2000, m: 200, k: 2, seeds_per_label: 2, mean_degree: 6.0, inter_fraction: 0.1, rng_seed: 1 }
    }
}

/// Nodes that carry `k` labels.
const MULTI_LABEL_GROUPS: usize = 3;

impl KSparseSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if self.m == 0 {
            return Err(invalid("m", "must be >= 1"));
        }
        if self.n < self.m {
            return Err(invalid("n", format!("need at least one node per label ({} < {})", self.n, self.m)));
        }
        if self.k == 0 {
            return Err(invalid("k", "must be >= 1"));
        }
        if self.k > self.m {
            return Err(invalid("k", format!("cannot exceed m = {}", self.m)));
        }
        if self.seeds_per_label == 0 {
            return Err(invalid("seeds_per_label", "must be >= 1"));
        }
        if !(self.mean_degree >= 0.0) {
            return Err(invalid("mean_degree", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.inter_fraction) {
            return Err(invalid("inter_fraction", "must lie in [0, 1]"));
        }
        if self.seeds_per_label * self.m > self.n * self.k {
            return Err(SynthError::Infeasible(format!(
                "{} seeds x {} labels exceed n*k = {}",
                self.seeds_per_label,
                self.m,
                self.n * self.k
            )));
        }
        let smallest = self.n / self.m;
        if self.seeds_per_label > smallest {
            return Err(SynthError::Infeasible(format!(
                "{} seeds per label do not fit in clusters of {smallest} nodes",
                self.seeds_per_label
            )));
        }
        Ok(())
    }
}

pub fn gen_ksparse(spec: &KSparseSpec) -> Result<Dataset, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let (n, m) = (spec.n, spec.m);
    let clusters = partition(n, m);
    let cluster_of: Vec<usize> = clusters.iter().enumerate().flat_map(|(c, r)| r.clone().map(move |_| c)).collect();

    let mut edges = EdgeSet::default();
    for r in &clusters {
        for v in r.start + 1..r.end {
            edges.insert(v - 1, v, 1.0);
        }
    }
    for w in clusters.windows(2) {
        edges.insert(w[0].end - 1, w[1].start, 1.0);
    }
    let target = ((n as f64 * spec.mean_degree) / 2.0).round() as usize;
    let mut attempts = 0usize;
    while edges.len() < target && attempts < 50 * target.max(1) {
        attempts += 1;
        let u = rng.gen_range(0..n);
        let v = if rng.gen_bool(spec.inter_fraction) {
            rng.gen_range(0..n)
        } else {
            rng.gen_range(clusters[cluster_of[u]].clone())
        };
        edges.insert(u, v, 1.0);
    }

    // Per-label seed nodes inside the label's own cluster.
    let mut seed_nodes: Vec<Vec<usize>> = clusters
        .iter()
        .map(|r| {
            let mut nodes: Vec<usize> = r.clone().collect();
            nodes.shuffle(&mut rng);
            nodes.truncate(spec.seeds_per_label);
            nodes
        })
        .collect();
    if spec.k > 1 {
        for g in 0..MULTI_LABEL_GROUPS.min(m / spec.k) {
            let head = g * spec.k;
            let shared = seed_nodes[head][0];
            for label in head + 1..head + spec.k {
                seed_nodes[label][0] = shared;
            }
        }
    }
    let entries: Vec<(usize, u32, f64)> = seed_nodes
        .iter()
        .enumerate()
        .flat_map(|(l, nodes)| nodes.iter().map(move |&v| (v, l as u32, 1.0)))
        .collect();

    let graph = Graph::from_named_edges(node_names(n), edges.edges, true)?;
    let seeds = SeedSet::new(n, label_names(m), entries)?;

    if !is_connected(&graph) {
        return Err(SynthError::Verification("graph is not connected".into()));
    }
    seeds.require_k_sparse(spec.k as f64)?;
    let found = seeds.k_sparsity();
    if found != spec.k as f64 {
        return Err(SynthError::Verification(format!("k-sparsity {found}, expected {}", spec.k)));
    }
    for (l, nodes) in seed_nodes.iter().enumerate() {
        let mut distinct = nodes.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != spec.seeds_per_label {
            return Err(SynthError::Verification(format!("label {l} has {} seeds", distinct.len())));
        }
    }

    let gold = cluster_gold(&clusters);
    let eval_nodes = (0..n).filter(|&v| !seeds.is_seeded(v)).collect();
    let meta = meta(&[
        ("generator", "ksparse".into()),
        ("n", n.to_string()),
        ("m", m.to_string()),
        ("k", spec.k.to_string()),
        ("seeds_per_label", spec.seeds_per_label.to_string()),
        ("mean_degree", spec.mean_degree.to_string()),
        ("inter_fraction", spec.inter_fraction.to_string()),
        ("rng", RNG_ALGORITHM.into()),
        ("rng_seed", spec.rng_seed.to_string()),
        ("edges", (graph.entry_count() / 2).to_string()),
        ("verified_k_sparsity", found.to_string()),
        ("verified_connected", "true".into()),
    ]);
    Ok(Dataset { graph, seeds, gold, eval_nodes, blocks: None, meta })
}
