use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, SeedSet};
use crate::metrics::{skew_report, Aggregation};
use crate::solver::{run, SolverConfig};

use super::{invalid, is_connected, label_names, meta, node_names, partition, Dataset, EdgeSet, SynthError, RNG_ALGORITHM};

/// Clusters that each rank the labels by a private random permutation.
/// Seed nodes score the label at rank `r` with `r^-z`, so propagated rows
/// inside a cluster keep that profile.
#[derive(Clone, Debug, PartialEq)]
pub struct ZipfSpec {
    pub n: usize,
    pub m: usize,
    pub z: f64,
    /// Labels scored on each seed row, `1..=m`.
    pub head: usize,
    pub clusters: usize,
    pub seed_fraction: f64,
    pub mean_degree: f64,
    /// Weight of the edges chaining consecutive clusters.
    pub bridge_weight: f64,
    pub rng_seed: u64,
    /// MAD-exact iterations of the post-generation skew check.
    pub verify_iterations: usize,
}

impl Default for ZipfSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            m: 100,
            z: 1.0,
            head: 100,
            clusters: 10,
            seed_fraction: 0.1,
            mean_degree: 6.0,
            bridge_weight: 0.1,
            rng_seed: 1,
            verify_iterations: 30,
        }
    }
}

/// Allowed gap between the fitted and requested exponent.
pub const Z_TOLERANCE: f64 = 0.15;

impl ZipfSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(invalid("z", format!("must be finite and > 0, got {}", self.z)));
        }
        if self.m == 0 {
            return Err(invalid("m", "must be >= 1"));
        }
        if self.head == 0 || self.head > self.m {
            return Err(invalid("head", format!("must lie in 1..={}", self.m)));
        }
        if self.clusters == 0 || self.clusters > self.n {
            return Err(invalid("clusters", format!("must lie in 1..={}", self.n)));
        }
        if !(self.seed_fraction > 0.0 && self.seed_fraction <= 1.0) {
            return Err(invalid("seed_fraction", "must lie in (0, 1]"));
        }
        if !(self.mean_degree >= 0.0) {
            return Err(invalid("mean_degree", "must be >= 0"));
        }
        if !(self.bridge_weight > 0.0) {
            return Err(invalid("bridge_weight", "must be > 0"));
        }
        Ok(())
    }
}

pub fn gen_zipf(spec: &ZipfSpec) -> Result<Dataset, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let (n, m) = (spec.n, spec.m);
    let clusters = partition(n, spec.clusters);

    let mut edges = EdgeSet::default();
    for r in &clusters {
        for v in r.start + 1..r.end {
            edges.insert(v - 1, v, 1.0);
        }
    }
    for w in clusters.windows(2) {
        edges.insert(w[0].end - 1, w[1].start, spec.bridge_weight);
    }
    let target = ((n as f64 * spec.mean_degree) / 2.0).round() as usize;
    let mut attempts = 0usize;
    while edges.len() < target && attempts < 50 * target.max(1) {
        attempts += 1;
        let r = &clusters[rng.gen_range(0..clusters.len())];
        if r.len() < 2 {
            continue;
        }
        edges.insert(rng.gen_range(r.clone()), rng.gen_range(r.clone()), 1.0);
    }

    let profile: Vec<f64> = (1..=spec.head).map(|r| (r as f64).powf(-spec.z)).collect();
    let mut entries = Vec::new();
    let mut gold = Vec::new();
    for r in &clusters {
        let mut order: Vec<u32> = (0..m as u32).collect();
        order.shuffle(&mut rng);
        let mut nodes: Vec<usize> = r.clone().collect();
        nodes.shuffle(&mut rng);
        let count = ((r.len() as f64 * spec.seed_fraction).ceil() as usize).clamp(1, r.len());
        for &v in &nodes[..count] {
            entries.extend(order.iter().zip(&profile).map(|(&l, &s)| (v, l, s)));
        }
        gold.extend(r.clone().map(|v| (v, order[0])));
    }

    let graph = Graph::from_named_edges(node_names(n), edges.edges, true)?;
    let seeds = SeedSet::new(n, label_names(m), entries)?;
    if !is_connected(&graph) {
        return Err(SynthError::Verification("graph is not connected".into()));
    }

    let verified = if spec.head >= 2 {
        let cfg = SolverConfig { iterations: spec.verify_iterations, ..SolverConfig::default() };
        let (state, _) = run(&graph, &seeds, cfg)?;
        let report = skew_report(&state, Some(spec.head), Aggregation::AllNodes)?;
        if (report.z - spec.z).abs() > Z_TOLERANCE {
            return Err(SynthError::Verification(format!(
                "fitted z {:.4} is outside {} +/- {Z_TOLERANCE}",
                report.z, spec.z
            )));
        }
        format!("{:.6}", report.z)
    } else {
        "n/a".into()
    };

    let eval_nodes = (0..n).filter(|&v| !seeds.is_seeded(v)).collect();
    let meta = meta(&[
        ("generator", "zipf".into()),
        ("n", n.to_string()),
        ("m", m.to_string()),
        ("z", spec.z.to_string()),
        ("head", spec.head.to_string()),
        ("clusters", spec.clusters.to_string()),
        ("seed_fraction", spec.seed_fraction.to_string()),
        ("mean_degree", spec.mean_degree.to_string()),
        ("bridge_weight", spec.bridge_weight.to_string()),
        ("rng", RNG_ALGORITHM.into()),
        ("rng_seed", spec.rng_seed.to_string()),
        ("verified_z", verified),
        ("verified_connected", "true".into()),
    ]);
    Ok(Dataset { graph, seeds, gold, eval_nodes, blocks: None, meta })
}
