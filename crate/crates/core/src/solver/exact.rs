//! Exact sparse-row updates.

use crate::graph::LabelDist;
use crate::par::map_nodes_with;

use super::Propagator;

/// Dense accumulator over label ids with a touched list, reused across
/// nodes handled by the same worker.
struct Scratch {
    acc: Vec<f64>,
    seen: Vec<bool>,
    touched: Vec<u32>,
}

impl Scratch {
    fn new(labels: usize) -> Self {
        Self { acc: vec![0.0; labels], seen: vec![false; labels], touched: Vec::new() }
    }

    #[inline]
    fn mark(&mut self, l: u32) {
        let i = l as usize;
        if !self.seen[i] {
            self.seen[i] = true;
            self.touched.push(l);
        }
    }

    #[inline]
    fn add(&mut self, l: u32, x: f64) {
        self.mark(l);
        self.acc[l as usize] += x;
    }

    /// Emits touched labels in ascending order through `f` and resets.
    fn drain<F: FnMut(u32, f64) -> Option<f64>>(&mut self, mut f: F) -> LabelDist {
        self.touched.sort_unstable();
        let mut out = Vec::with_capacity(self.touched.len());
        for &l in &self.touched {
            let i = l as usize;
            if let Some(y) = f(l, self.acc[i]) {
                out.push((l, y));
            }
            self.acc[i] = 0.0;
            self.seen[i] = false;
        }
        self.touched.clear();
        LabelDist::from_sorted(out)
    }
}

fn keep(y: f64, threshold: f64) -> Option<f64> {
    (y > 0.0 && y >= threshold).then_some(y)
}

pub(super) fn mad_step(p: &Propagator<'_>, rows: &[LabelDist]) -> Vec<LabelDist> {
    let w = p.weights().expect("MAD propagator carries weights");
    let seeds = p.seeds();
    let [mu1, mu2, mu3] = w.mu();
    let labels = seeds.num_labels() + 1;
    let threshold = p.config().prune_threshold;
    map_nodes_with(
        p.config().parallelism,
        rows.len(),
        || Scratch::new(labels),
        |scratch, v| {
            let (cols, vals) = w.symmetric_row(v);
            for (&u, &wuv) in cols.iter().zip(vals) {
                for &(l, y) in rows[u as usize].entries() {
                    scratch.add(l, wuv * y);
                }
            }
            let q = seeds.row(v);
            let r = w.prior(v);
            for (l, _) in q.iter().chain(r.iter()) {
                scratch.mark(l);
            }
            let s = w.injection_indicator(v);
            let m_vv = w.normalizer(v);
            scratch.drain(|l, d| keep((mu1 * s * q.get(l) + mu2 * d + mu3 * r.get(l)) / m_vv, threshold))
        },
    )
}

pub(super) fn harmonic_step(p: &Propagator<'_>, rows: &[LabelDist]) -> Vec<LabelDist> {
    let g = p.graph();
    let seeds = p.seeds();
    let labels = seeds.num_labels() + 1;
    let threshold = p.config().prune_threshold;
    map_nodes_with(
        p.config().parallelism,
        rows.len(),
        || Scratch::new(labels),
        |scratch, v| {
            if seeds.is_seeded(v) {
                return seeds.row(v).clone();
            }
            let deg = g.degree(v);
            if deg == 0.0 {
                return LabelDist::new();
            }
            for (u, wvu) in g.neighbors(v) {
                for &(l, y) in rows[u].entries() {
                    scratch.add(l, wvu * y);
                }
            }
            scratch.drain(|_, acc| keep(acc / deg, threshold))
        },
    )
}
