//! Sketch-store updates, expressed only through sketch linear algebra.

use crate::cms::{CountMinSketch, SketchParams};
use crate::par::map_nodes;

use super::{Method, Propagator, SolverError};

/// Constant per-node term of the update, or `None` when it is zero.
pub(super) fn build_priors(p: &Propagator<'_>, params: SketchParams) -> Vec<Option<CountMinSketch>> {
    let proto = CountMinSketch::new(params);
    let seeds = p.seeds();
    let n = p.graph().node_count();
    let sketch_of = |pairs: &mut dyn Iterator<Item = (u32, f64)>| {
        let mut s = proto.zeroed_like();
        for (l, y) in pairs {
            s.update(l as u64, y);
        }
        s
    };
    (0..n)
        .map(|v| match p.config().method {
            Method::Harmonic => seeds.is_seeded(v).then(|| sketch_of(&mut seeds.row(v).iter())),
            Method::Mad => {
                let w = p.weights().expect("MAD propagator carries weights");
                let [mu1, _, mu3] = w.mu();
                let q = seeds.row(v);
                let r = w.prior(v);
                let inject = mu1 * w.injection_indicator(v);
                if (inject == 0.0 || q.is_empty()) && (mu3 == 0.0 || r.is_empty()) {
                    return None;
                }
                let mut acc = proto.zeroed_like();
                if inject != 0.0 && !q.is_empty() {
                    acc.axpy(inject, &sketch_of(&mut q.iter())).expect("same params");
                }
                if mu3 != 0.0 && !r.is_empty() {
                    acc.axpy(mu3, &sketch_of(&mut r.iter())).expect("same params");
                }
                Some(acc)
            }
        })
        .collect()
}

pub(super) fn mad_step(p: &Propagator<'_>, sketches: &[CountMinSketch]) -> Result<Vec<CountMinSketch>, SolverError> {
    let w = p.weights().expect("MAD propagator carries weights");
    let [_, mu2, _] = w.mu();
    let Some(proto) = sketches.first() else { return Ok(Vec::new()) };
    let next = map_nodes(p.config().parallelism, sketches.len(), |v| {
        let mut acc = proto.zeroed_like();
        if let Some(prior) = &p.priors[v] {
            acc.axpy(1.0, prior)?;
        }
        let (cols, vals) = w.symmetric_row(v);
        for (&u, &wuv) in cols.iter().zip(vals) {
            acc.axpy(mu2 * wuv, &sketches[u as usize])?;
        }
        acc.scale(1.0 / w.normalizer(v));
        Ok::<_, SolverError>(acc)
    });
    next.into_iter().collect()
}

pub(super) fn harmonic_step(
    p: &Propagator<'_>,
    sketches: &[CountMinSketch],
) -> Result<Vec<CountMinSketch>, SolverError> {
    let g = p.graph();
    let Some(proto) = sketches.first() else { return Ok(Vec::new()) };
    let next = map_nodes(p.config().parallelism, sketches.len(), |v| {
        if let Some(q) = &p.priors[v] {
            return Ok(q.clone());
        }
        let mut acc = proto.zeroed_like();
        let deg = g.degree(v);
        if deg > 0.0 {
            for (u, wvu) in g.neighbors(v) {
                acc.axpy(wvu / deg, &sketches[u])?;
            }
        }
        Ok::<_, SolverError>(acc)
    });
    next.into_iter().collect()
}
