//! Random-walk probabilities and the modified weights MAD propagates over.
//!
//! Every node `v` gets injection, continuation and abandonment
//! probabilities. Continuation scales the row-normalised transition
//! weights, `W'_vu = p_cont(v) · W_vu / D_vv`; abandonment becomes the prior
//! `R_v = {⊥: p_abnd(v)}` on the dummy label. The update only ever needs the
//! symmetric term `W'_uv + W'_vu`, which is precomputed per edge.

use super::{Csr, Graph, GraphError, LabelDist, SeedSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightMode {
    /// `p_inj = 0.5` on seeds, `p_abnd = 0`, `p_cont` the remainder.
    Uniform,
    /// Adsorption's transition-entropy heuristic with parameter `β > 1`.
    Entropy { beta: f64 },
}

impl Default for WeightMode {
    fn default() -> Self {
        WeightMode::Entropy { beta: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeProbabilities {
    pub inj: f64,
    pub cont: f64,
    pub abnd: f64,
}

#[derive(Clone, Debug)]
pub struct PropagationWeights {
    probs: Vec<NodeProbabilities>,
    modified: Csr,
    symmetric: Csr,
    normalizers: Vec<f64>,
    priors: Vec<LabelDist>,
    seeded: Vec<bool>,
    mu: [f64; 3],
    dummy_label: u32,
}

fn check_mu(name: &'static str, mu: f64) -> Result<(), GraphError> {
    if mu >= 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(GraphError::InvalidParameter { field: name, reason: format!("must be finite and >= 0, got {mu}") })
    }
}

fn entropy_probabilities(g: &Graph, v: usize, seeded: bool, beta: f64) -> NodeProbabilities {
    let deg = g.degree(v);
    let entropy = if deg > 0.0 {
        -g.row(v)
            .1
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| {
                let p = w / deg;
                p * p.ln()
            })
            .sum::<f64>()
    } else {
        0.0
    };
    let entropy = entropy.max(0.0);
    let c = beta.ln() / (beta + entropy.exp()).ln();
    let d = if seeded { (1.0 - c) * entropy.sqrt() } else { 0.0 };
    let z = (c + d).max(1.0);
    let cont = c / z;
    let inj = d / z;
    NodeProbabilities { inj, cont, abnd: (1.0 - cont - inj).max(0.0) }
}

/// Derives MAD's per-node quantities for `(μ1, μ2, μ3)`.
pub fn build_weights(
    g: &Graph,
    seeds: &SeedSet,
    mode: WeightMode,
    mu1: f64,
    mu2: f64,
    mu3: f64,
) -> Result<PropagationWeights, GraphError> {
    check_mu("mu1", mu1)?;
    check_mu("mu2", mu2)?;
    check_mu("mu3", mu3)?;
    if let WeightMode::Entropy { beta } = mode {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(GraphError::InvalidParameter { field: "beta", reason: format!("must exceed 1, got {beta}") });
        }
    }
    let n = g.node_count();
    if seeds.node_count() != n {
        return Err(GraphError::InvalidParameter {
            field: "seeds",
            reason: format!("seed set covers {} nodes, graph has {n}", seeds.node_count()),
        });
    }

    let seeded: Vec<bool> = (0..n).map(|v| seeds.is_seeded(v)).collect();
    let probs: Vec<NodeProbabilities> = (0..n)
        .map(|v| match mode {
            WeightMode::Uniform => {
                let inj = if seeded[v] { 0.5 } else { 0.0 };
                NodeProbabilities { inj, cont: 1.0 - inj, abnd: 0.0 }
            }
            WeightMode::Entropy { beta } => entropy_probabilities(g, v, seeded[v], beta),
        })
        .collect();

    let mut modified_triplets = Vec::with_capacity(g.entry_count());
    let mut symmetric_triplets = Vec::with_capacity(2 * g.entry_count());
    for v in 0..n {
        let deg = g.degree(v);
        if deg == 0.0 {
            continue;
        }
        let scale = probs[v].cont / deg;
        for (u, w) in g.neighbors(v) {
            let wp = scale * w;
            modified_triplets.push((v as u32, u as u32, wp));
            symmetric_triplets.push((v as u32, u as u32, wp));
            symmetric_triplets.push((u as u32, v as u32, wp));
        }
    }
    let modified = Csr::from_triplets(n, modified_triplets);
    let symmetric = Csr::from_triplets(n, symmetric_triplets);

    let dummy_label = seeds.dummy_label();
    let mut normalizers = Vec::with_capacity(n);
    for v in 0..n {
        let s = if seeded[v] { 1.0 } else { 0.0 };
        let m_vv = mu1 * s + mu2 * symmetric.row_sum(v) + mu3;
        if !(m_vv > 0.0) {
            return Err(GraphError::ZeroNormalizer { node: g.node_name(v).to_string() });
        }
        normalizers.push(m_vv);
    }
    let priors = probs
        .iter()
        .map(|p| if p.abnd > 0.0 { LabelDist::from_sorted(vec![(dummy_label, p.abnd)]) } else { LabelDist::new() })
        .collect();

    Ok(PropagationWeights { probs, modified, symmetric, normalizers, priors, seeded, mu: [mu1, mu2, mu3], dummy_label })
}

impl PropagationWeights {
    pub fn node_count(&self) -> usize {
        self.probs.len()
    }

    pub fn probabilities(&self, v: usize) -> NodeProbabilities {
        self.probs[v]
    }

    /// Row `v` of `W'`: neighbour ids and `W'_vu`.
    pub fn modified_row(&self, v: usize) -> (&[u32], &[f64]) {
        self.modified.row(v)
    }

    /// Neighbour ids of `v` and `W'_uv + W'_vu`, in ascending id order.
    pub fn symmetric_row(&self, v: usize) -> (&[u32], &[f64]) {
        self.symmetric.row(v)
    }

    /// `M_vv`.
    pub fn normalizer(&self, v: usize) -> f64 {
        self.normalizers[v]
    }

    /// `R_v`, mass `p_abnd(v)` on the dummy label.
    pub fn prior(&self, v: usize) -> &LabelDist {
        &self.priors[v]
    }

    /// `S_vv` as 0/1.
    pub fn injection_indicator(&self, v: usize) -> f64 {
        if self.seeded[v] {
            1.0
        } else {
            0.0
        }
    }

    pub fn mu(&self) -> [f64; 3] {
        self.mu
    }

    pub fn dummy_label(&self) -> u32 {
        self.dummy_label
    }
}

#[cfg(test)]
mod tests {
    use indexmap::IndexSet;

    use super::*;
    use crate::graph::load_edges;

    fn star() -> Graph {
        load_edges("c a\nc b\n".as_bytes(), true).unwrap()
    }

    fn seeds_on(g: &Graph, nodes: &[&str]) -> SeedSet {
        let labels: IndexSet<String> = std::iter::once("A".to_string()).collect();
        let entries = nodes.iter().map(|n| (g.node_id(n).unwrap(), 0, 1.0)).collect();
        SeedSet::new(g.node_count(), labels, entries).unwrap()
    }

    #[test]
    fn uniform_unseeded_row_is_normalized_w() {
        let g = load_edges("a b 1\na c 3\n".as_bytes(), true).unwrap();
        let s = seeds_on(&g, &["b"]);
        let w = build_weights(&g, &s, WeightMode::Uniform, 0.98, 0.01, 0.01).unwrap();
        let a = g.node_id("a").unwrap();
        let p = w.probabilities(a);
        assert_eq!((p.inj, p.cont, p.abnd), (0.0, 1.0, 0.0));
        assert_eq!(w.modified_row(a).1, &[0.25, 0.75]);
        let b = g.node_id("b").unwrap();
        assert_eq!(w.probabilities(b).inj, 0.5);
        assert!(w.prior(a).is_empty());
    }

    /// Golden values for the 3-node star, worked by hand from
    /// `H = −Σ p ln p`, `c = ln β / ln(β + e^H)`, `d = (1 − c)√H`.
    #[test]
    fn star_entropy_golden() {
        let golden = include_str!("../../tests/golden/star_entropy.tsv");
        let g = star();
        let s = seeds_on(&g, &["c"]);
        let w = build_weights(&g, &s, WeightMode::Entropy { beta: 2.0 }, 0.98, 0.01, 0.01).unwrap();
        for line in golden.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            let v = g.node_id(f[0]).unwrap();
            let want: Vec<f64> = f[1..4].iter().map(|x| x.parse().unwrap()).collect();
            let p = w.probabilities(v);
            for (got, want) in [p.inj, p.cont, p.abnd].iter().zip(&want) {
                assert!((got - want).abs() < 1e-9, "{}: {got} vs {want}", f[0]);
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one_and_rows_are_substochastic() {
        let text: String = (0..30).map(|i| format!("{} {} {}\n", i, (i * 7 + 3) % 30, 1 + i % 4)).collect();
        let g = load_edges(text.as_bytes(), true).unwrap();
        let s = seeds_on(&g, &["0", "5", "11"]);
        for mode in [WeightMode::Uniform, WeightMode::Entropy { beta: 2.0 }, WeightMode::Entropy { beta: 5.0 }] {
            let w = build_weights(&g, &s, mode, 0.98, 0.01, 0.01).unwrap();
            for v in 0..g.node_count() {
                let p = w.probabilities(v);
                assert!((p.inj + p.cont + p.abnd - 1.0).abs() < 1e-9);
                let row: f64 = w.modified_row(v).1.iter().sum();
                assert!(row <= p.cont + 1e-9);
            }
        }
    }

    #[test]
    fn normalizer_matches_definition() {
        let g = star();
        let s = seeds_on(&g, &["a"]);
        let w = build_weights(&g, &s, WeightMode::Uniform, 0.5, 0.3, 0.2).unwrap();
        let a = g.node_id("a").unwrap();
        let c = g.node_id("c").unwrap();
        // a seeded: p_cont = 0.5, W'_ac = 0.5; c unseeded: W'_ca = W'_cb = 0.5;
        // b unseeded leaf: W'_bc = 1.
        let (_, sym) = w.symmetric_row(a);
        assert_eq!(sym, &[1.0]);
        assert!((w.normalizer(a) - (0.5 + 0.3 * 1.0 + 0.2)).abs() < 1e-15);
        let (cols, sym) = w.symmetric_row(c);
        assert_eq!(cols.len(), 2);
        assert_eq!(sym, &[1.0, 1.5]);
    }

    #[test]
    fn isolated_node_without_mu3_is_an_error() {
        let g = load_edges("a b\nlonely\n".as_bytes(), true).unwrap();
        let s = seeds_on(&g, &["a"]);
        let err = build_weights(&g, &s, WeightMode::Uniform, 0.0, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, GraphError::ZeroNormalizer { ref node } if node == "lonely"));
        assert!(build_weights(&g, &s, WeightMode::Uniform, 0.0, 1.0, 0.1).is_ok());
    }

    #[test]
    fn parameter_validation() {
        let g = star();
        let s = seeds_on(&g, &["a"]);
        assert!(build_weights(&g, &s, WeightMode::Entropy { beta: 1.0 }, 1.0, 1.0, 1.0).is_err());
        assert!(build_weights(&g, &s, WeightMode::Uniform, -0.1, 1.0, 1.0).is_err());
    }
}
