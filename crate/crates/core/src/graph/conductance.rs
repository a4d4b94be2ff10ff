//! Max-conductance `ψ(S) = max_{u∈S} ∂(u,S) / vol(u)` and ordinary
//! conductance `φ(S) = Σ_{u∈S} ∂(u,S) / min(vol(S), vol(V) − vol(S))`.

use super::{Graph, GraphError, PropagationWeights};

/// Which weight matrix the boundary and volume sums run over.
#[derive(Clone, Copy, Debug)]
pub enum ConductanceWeights<'a> {
    Raw,
    /// The symmetric MAD weights `W'_uv + W'_vu`.
    Modified(&'a PropagationWeights),
}

impl ConductanceWeights<'_> {
    fn row<'g>(&'g self, g: &'g Graph, u: usize) -> (&'g [u32], &'g [f64]) {
        match self {
            ConductanceWeights::Raw => g.row(u),
            ConductanceWeights::Modified(w) => w.symmetric_row(u),
        }
    }
}

fn membership(g: &Graph, set: &[usize]) -> Result<Vec<bool>, GraphError> {
    if set.is_empty() {
        return Err(GraphError::Conductance("node set is empty".into()));
    }
    let n = g.node_count();
    let mut inside = vec![false; n];
    for &u in set {
        if u >= n {
            return Err(GraphError::NodeOutOfRange { id: u, n });
        }
        inside[u] = true;
    }
    Ok(inside)
}

/// Boundary weight and volume of every distinct member of `set`.
fn member_sums(g: &Graph, set: &[usize], weights: ConductanceWeights<'_>) -> Result<Vec<(usize, f64, f64)>, GraphError> {
    let inside = membership(g, set)?;
    let mut out = Vec::with_capacity(set.len());
    for u in 0..g.node_count() {
        if !inside[u] {
            continue;
        }
        let (cols, vals) = weights.row(g, u);
        let vol: f64 = vals.iter().sum();
        let boundary: f64 = cols.iter().zip(vals).filter(|(&v, _)| !inside[v as usize]).map(|(_, &w)| w).sum();
        out.push((u, boundary, vol));
    }
    Ok(out)
}

pub fn max_conductance(g: &Graph, set: &[usize], weights: ConductanceWeights<'_>) -> Result<f64, GraphError> {
    let mut psi: f64 = 0.0;
    for (u, boundary, vol) in member_sums(g, set, weights)? {
        if vol == 0.0 {
            return Err(GraphError::Conductance(format!("node {:?} has zero volume", g.node_name(u))));
        }
        psi = psi.max(boundary / vol);
    }
    Ok(psi)
}

/// Ordinary conductance. Defined as 0 when `S` has no boundary (including
/// `S = V`).
pub fn conductance(g: &Graph, set: &[usize], weights: ConductanceWeights<'_>) -> Result<f64, GraphError> {
    let sums = member_sums(g, set, weights)?;
    let boundary: f64 = sums.iter().map(|s| s.1).sum();
    let vol_s: f64 = sums.iter().map(|s| s.2).sum();
    let vol_v: f64 = (0..g.node_count()).map(|u| weights.row(g, u).1.iter().sum::<f64>()).sum();
    if boundary == 0.0 {
        return Ok(0.0);
    }
    let denom = vol_s.min(vol_v - vol_s);
    if denom <= 0.0 {
        return Err(GraphError::Conductance("set volume is zero".into()));
    }
    Ok(boundary / denom)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::graph::load_edges;

    fn two_triangles() -> Graph {
        load_edges("a b\nb c\nc a\nx y\ny z\nz x\na x\n".as_bytes(), true).unwrap()
    }

    #[test]
    fn whole_vertex_set_has_no_boundary() {
        let g = two_triangles();
        let all: Vec<usize> = (0..g.node_count()).collect();
        assert_eq!(max_conductance(&g, &all, ConductanceWeights::Raw).unwrap(), 0.0);
        assert_eq!(conductance(&g, &all, ConductanceWeights::Raw).unwrap(), 0.0);
    }

    #[test]
    fn bridged_triangles() {
        let g = two_triangles();
        let s: Vec<usize> = ["a", "b", "c"].iter().map(|n| g.node_id(n).unwrap()).collect();
        let psi = max_conductance(&g, &s, ConductanceWeights::Raw).unwrap();
        let phi = conductance(&g, &s, ConductanceWeights::Raw).unwrap();
        assert!((psi - 1.0 / 3.0).abs() < 1e-15);
        assert!((phi - 1.0 / 7.0).abs() < 1e-15);
        assert!(psi >= phi);
    }

    #[test]
    fn phi_can_exceed_psi_on_the_large_side() {
        let g = load_edges("a b\nb x\n".as_bytes(), true).unwrap();
        let s = [g.node_id("a").unwrap(), g.node_id("b").unwrap()];
        assert_eq!(max_conductance(&g, &s, ConductanceWeights::Raw).unwrap(), 0.5);
        assert_eq!(conductance(&g, &s, ConductanceWeights::Raw).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        let g = load_edges("a b\nlonely\n".as_bytes(), true).unwrap();
        assert!(max_conductance(&g, &[], ConductanceWeights::Raw).is_err());
        assert!(max_conductance(&g, &[2], ConductanceWeights::Raw).is_err());
        assert!(max_conductance(&g, &[7], ConductanceWeights::Raw).is_err());
    }

    proptest! {
        #[test]
        fn psi_dominates_phi(
            edges in proptest::collection::vec((0usize..25, 0usize..25, 0.1f64..5.0), 30..120),
            picks in proptest::collection::vec(any::<bool>(), 25),
        ) {
            let mut edges = edges;
            // A ring keeps every node at positive volume.
            edges.extend((0..25).map(|i| (i, (i + 1) % 25, 1.0)));
            let g = Graph::from_edges(25, edges, true).unwrap();
            let s: Vec<usize> = picks.iter().enumerate().filter(|p| *p.1).map(|p| p.0).collect();
            prop_assume!(!s.is_empty());
            // With vol(S) > vol(V)/2 the min() in φ switches to the
            // complement and φ can exceed ψ (path a-b-x, S = {a, b}).
            let vol_s: f64 = s.iter().map(|&u| g.degree(u)).sum();
            prop_assume!(2.0 * vol_s <= g.total_volume());
            let psi = max_conductance(&g, &s, ConductanceWeights::Raw).unwrap();
            let phi = conductance(&g, &s, ConductanceWeights::Raw).unwrap();
            prop_assert!(psi + 1e-12 >= phi, "psi {} < phi {}", psi, phi);
        }
    }
}
