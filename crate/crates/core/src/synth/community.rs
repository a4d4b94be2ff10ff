use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{max_conductance, ConductanceWeights, Graph, SeedSet};

use super::{cluster_gold, invalid, label_names, meta, node_names, partition, Dataset, EdgeSet, SynthError, RNG_ALGORITHM};

/// Dense blocks joined by sparse bridges, with one binary seed per block
/// labelled by the block index.
#[derive(Clone, Debug, PartialEq)]
pub struct CommunitySpec {
    pub blocks: usize,
    pub block_size: usize,
    /// Probability of each intra-block pair beyond the spanning path.
    pub intra_p: f64,
    pub intra_weight: f64,
    /// Bridges from each block to the next one.
    pub bridges_per_block: usize,
    pub bridge_weight: f64,
    /// Upper bound on every block's max-conductance.
    pub psi_target: f64,
    pub rng_seed: u64,
}

impl Default for CommunitySpec {
    fn default() -> Self {
        Self {
            blocks: 20,
            block_size: 50,
            intra_p: 0.3,
            intra_weight: 1.0,
            bridges_per_block: 1,
            bridge_weight: 1.0,
            psi_target: 0.05,
            rng_seed: 1,
        }
    }
}

impl CommunitySpec {
    fn validate(&self) -> Result<(), SynthError> {
        if self.blocks == 0 {
            return Err(invalid("blocks", "must be >= 1"));
        }
        if self.block_size < 2 {
            return Err(invalid("block_size", "must be >= 2"));
        }
        if !(0.0..=1.0).contains(&self.intra_p) {
            return Err(invalid("intra_p", "must lie in [0, 1]"));
        }
        if !(self.intra_weight > 0.0) {
            return Err(invalid("intra_weight", "must be > 0"));
        }
        if !(self.bridge_weight > 0.0) {
            return Err(invalid("bridge_weight", "must be > 0"));
        }
        if !(self.psi_target >= 0.0 && self.psi_target < 1.0) {
            return Err(invalid("psi_target", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

fn block_psis(g: &Graph, blocks: &[Vec<usize>]) -> Result<Vec<f64>, SynthError> {
    Ok(blocks.iter().map(|b| max_conductance(g, b, ConductanceWeights::Raw)).collect::<Result<_, _>>()?)
}

pub fn gen_community(spec: &CommunitySpec) -> Result<Dataset, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let b = spec.blocks;
    let n = b * spec.block_size;
    let ranges = partition(n, b);
    let blocks: Vec<Vec<usize>> = ranges.iter().map(|r| r.clone().collect()).collect();

    let mut intra = EdgeSet::default();
    for r in &ranges {
        for v in r.start + 1..r.end {
            intra.insert(v - 1, v, spec.intra_weight);
        }
        for u in r.clone() {
            for v in u + 1..r.end {
                if rng.gen_bool(spec.intra_p) {
                    intra.insert(u, v, spec.intra_weight);
                }
            }
        }
    }
    // Block i bridges to block i + 1 (cyclically); two blocks share one
    // direction only.
    let bridge_sources = match b {
        1 => 0,
        2 => 1,
        _ => b,
    };
    let mut bridges = EdgeSet::default();
    for i in 0..bridge_sources {
        let (from, to) = (&ranges[i], &ranges[(i + 1) % b]);
        for _ in 0..spec.bridges_per_block {
            bridges.insert(rng.gen_range(from.clone()), rng.gen_range(to.clone()), spec.bridge_weight);
        }
    }

    let build = |scale: f64| {
        let edges = intra.edges.iter().copied().chain(bridges.edges.iter().map(|&(u, v, w)| (u, v, w * scale)));
        Graph::from_named_edges(node_names(n), edges, true)
    };
    let mut graph = build(1.0)?;
    let mut psis = block_psis(&graph, &blocks)?;
    let mut scale = 1.0;
    let worst = psis.iter().copied().fold(0.0, f64::max);
    if worst > spec.psi_target {
        // ∂(u)·α / (I_u + ∂(u)·α) ≤ ψ* for every boundary node u.
        let block_of: Vec<usize> = (0..n).map(|v| v / spec.block_size).collect();
        let mut alpha = f64::INFINITY;
        for u in 0..n {
            let (mut inside, mut boundary) = (0.0, 0.0);
            for (v, w) in graph.neighbors(u) {
                if block_of[v] == block_of[u] {
                    inside += w;
                } else {
                    boundary += w;
                }
            }
            if boundary > 0.0 {
                alpha = alpha.min(spec.psi_target * inside / ((1.0 - spec.psi_target) * boundary));
            }
        }
        if !(alpha > 0.0) {
            return Err(SynthError::UnreachablePsi { target: spec.psi_target, achievable: worst });
        }
        // Shave a relative 1e-9 so rounding cannot leave the binding node
        // just above the target.
        scale = alpha * (1.0 - 1e-9);
        graph = build(scale)?;
        psis = block_psis(&graph, &blocks)?;
        let after = psis.iter().copied().fold(0.0, f64::max);
        if after > spec.psi_target {
            return Err(SynthError::UnreachablePsi { target: spec.psi_target, achievable: after });
        }
    }
    let max_psi = psis.iter().copied().fold(0.0, f64::max);

    let entries: Vec<(usize, u32, f64)> =
        ranges.iter().enumerate().map(|(i, r)| (rng.gen_range(r.clone()), i as u32, 1.0)).collect();
    let seeds = SeedSet::new(n, label_names(b), entries)?;
    if !seeds.is_binary() || seeds.k_sparsity() != 1.0 {
        return Err(SynthError::Verification("seeds are not one binary label per block".into()));
    }

    let gold = cluster_gold(&ranges);
    let eval_nodes = (0..n).filter(|&v| !seeds.is_seeded(v)).collect();
    let meta = meta(&[
        ("generator", "community".into()),
        ("blocks", b.to_string()),
        ("block_size", spec.block_size.to_string()),
        ("intra_p", spec.intra_p.to_string()),
        ("intra_weight", spec.intra_weight.to_string()),
        ("bridges_per_block", spec.bridges_per_block.to_string()),
        ("bridge_weight", spec.bridge_weight.to_string()),
        ("bridge_scale", scale.to_string()),
        ("psi_target", spec.psi_target.to_string()),
        ("rng", RNG_ALGORITHM.into()),
        ("rng_seed", spec.rng_seed.to_string()),
        ("verified_max_psi", max_psi.to_string()),
    ]);
    Ok(Dataset { graph, seeds, gold, eval_nodes, blocks: Some(blocks), meta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psis(ds: &Dataset) -> Vec<f64> {
        block_psis(&ds.graph, ds.blocks.as_ref().unwrap()).unwrap()
    }

    #[test]
    fn no_bridges_means_zero_psi() {
        let ds = gen_community(&CommunitySpec { blocks: 4, block_size: 5, bridges_per_block: 0, ..CommunitySpec::default() })
            .unwrap();
        assert!(psis(&ds).iter().all(|&p| p == 0.0));
    }

    #[test]
    fn two_triangles_with_a_bridge() {
        let spec = CommunitySpec { blocks: 2, block_size: 3, intra_p: 1.0, psi_target: 0.5, ..CommunitySpec::default() };
        let ds = gen_community(&spec).unwrap();
        assert_eq!(ds.graph.entry_count(), 14);
        for p in psis(&ds) {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn acceptance_blocks_meet_target() {
        let ds = gen_community(&CommunitySpec::default()).unwrap();
        assert_eq!(ds.blocks.as_ref().unwrap().len(), 20);
        assert!(psis(&ds).iter().all(|&p| p <= 0.05));
        assert_eq!(ds.seeds.num_labels(), 20);
        assert!(ds.seeds.is_binary());
        assert!(ds.meta_value("bridge_scale").unwrap().parse::<f64>().unwrap() < 1.0);
    }

    #[test]
    fn zero_target_with_bridges_is_unreachable() {
        let spec = CommunitySpec { blocks: 3, block_size: 4, psi_target: 0.0, ..CommunitySpec::default() };
        assert!(matches!(gen_community(&spec), Err(SynthError::UnreachablePsi { .. })));
    }

    #[test]
    fn deterministic() {
        let spec = CommunitySpec { blocks: 5, block_size: 10, ..CommunitySpec::default() };
        let a = gen_community(&spec).unwrap();
        let b = gen_community(&spec).unwrap();
        assert_eq!(a.meta, b.meta);
        assert_eq!(a.seeds.entries(), b.seeds.entries());
    }
}
