use std::sync::OnceLock;

use crate::cms::CountMinSketch;
use crate::graph::{LabelDist, SeedSet};
use crate::par::{map_nodes, Parallelism};

use super::{Backend, SolverError};

#[derive(Clone, Debug, PartialEq)]
pub enum LabelStore {
    Exact(Vec<LabelDist>),
    Sketch(Vec<CountMinSketch>),
}

/// Per-node label scores at some iteration `t`.
///
/// Label ids `0..m` are the real labels; `m` is the dummy label that
/// carries abandonment mass.
#[derive(Clone, Debug)]
pub struct LabelState {
    pub(crate) store: LabelStore,
    pub(crate) iteration: usize,
    pub(crate) num_labels: usize,
    /// Sketch store only: flat cell index of every label id `0..=m` in every
    /// row, filled on first bulk query.
    cells: OnceLock<Vec<usize>>,
}

impl PartialEq for LabelState {
    fn eq(&self, other: &Self) -> bool {
        self.store == other.store && self.iteration == other.iteration && self.num_labels == other.num_labels
    }
}

impl LabelState {
    pub(crate) fn from_store(store: LabelStore, iteration: usize, num_labels: usize) -> Self {
        Self { store, iteration, num_labels, cells: OnceLock::new() }
    }

    /// An exact state from explicit rows, at iteration 0.
    pub fn exact(rows: Vec<LabelDist>, num_labels: usize) -> Self {
        Self::from_store(LabelStore::Exact(rows), 0, num_labels)
    }

    /// A sketch state from explicit sketches, at iteration 0. All sketches
    /// must share parameters.
    pub fn sketch(sketches: Vec<CountMinSketch>, num_labels: usize) -> Result<Self, SolverError> {
        if let Some(first) = sketches.first() {
            if let Some(bad) = sketches.iter().find(|s| !s.is_compatible(first)) {
                return Err(crate::cms::CmsError::Incompatible { left: *first.params(), right: *bad.params() }.into());
            }
        }
        Ok(Self::from_store(LabelStore::Sketch(sketches), 0, num_labels))
    }

    pub(crate) fn initial(seeds: &SeedSet, backend: Backend) -> Self {
        let n = seeds.node_count();
        let store = match backend {
            Backend::Exact => LabelStore::Exact((0..n).map(|v| seeds.row(v).clone()).collect()),
            Backend::Sketch(params) => {
                let proto = CountMinSketch::new(params);
                LabelStore::Sketch(
                    (0..n)
                        .map(|v| {
                            let mut s = proto.zeroed_like();
                            for (l, q) in seeds.row(v).iter() {
                                s.update(l as u64, q);
                            }
                            s
                        })
                        .collect(),
                )
            }
        };
        Self::from_store(store, 0, seeds.num_labels())
    }

    pub fn store(&self) -> &LabelStore {
        &self.store
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn dummy_label(&self) -> u32 {
        self.num_labels as u32
    }

    pub fn node_count(&self) -> usize {
        match &self.store {
            LabelStore::Exact(rows) => rows.len(),
            LabelStore::Sketch(sk) => sk.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.store, LabelStore::Exact(_))
    }

    pub fn exact_rows(&self) -> Option<&[LabelDist]> {
        match &self.store {
            LabelStore::Exact(rows) => Some(rows),
            LabelStore::Sketch(_) => None,
        }
    }

    pub fn sketches(&self) -> Option<&[CountMinSketch]> {
        match &self.store {
            LabelStore::Sketch(sk) => Some(sk),
            LabelStore::Exact(_) => None,
        }
    }

    /// Stored label entries: non-zeros for the exact store, counters for
    /// the sketch store.
    pub fn store_entries(&self) -> usize {
        match &self.store {
            LabelStore::Exact(rows) => rows.iter().map(LabelDist::len).sum(),
            LabelStore::Sketch(sk) => sk.iter().map(|s| s.counters().len()).sum(),
        }
    }

    /// Deterministic label-store footprint in bytes.
    pub fn store_bytes(&self) -> usize {
        match &self.store {
            LabelStore::Exact(_) => self.store_entries() * std::mem::size_of::<(u32, f64)>(),
            LabelStore::Sketch(_) => self.store_entries() * std::mem::size_of::<f64>(),
        }
    }

    fn check_node(&self, v: usize) -> Result<(), SolverError> {
        let n = self.node_count();
        if v >= n {
            Err(SolverError::UnknownNode { id: v, n })
        } else {
            Ok(())
        }
    }

    /// Score (exact) or estimate (sketch) of one label at one node.
    pub fn score(&self, v: usize, label: u32) -> f64 {
        match &self.store {
            LabelStore::Exact(rows) => rows[v].get(label),
            LabelStore::Sketch(sk) => sk[v].query(label as u64),
        }
    }

    /// Scores of `labels` at `v`; zero scores are omitted. The dummy label
    /// is only reported when listed.
    pub fn extract_scores(&self, v: usize, labels: &[u32]) -> Result<LabelDist, SolverError> {
        self.check_node(v)?;
        Ok(match &self.store {
            LabelStore::Exact(rows) => rows[v].restrict(labels),
            LabelStore::Sketch(sk) => LabelDist::from_pairs(
                labels.iter().map(|&l| (l, sk[v].query(l as u64))).filter(|&(_, s)| s != 0.0),
            ),
        })
    }

    fn label_cells(&self) -> Option<&[usize]> {
        let LabelStore::Sketch(sk) = &self.store else {
            return None;
        };
        let first = sk.first()?;
        Some(self.cells.get_or_init(|| {
            let h = first.hashes();
            (0..=self.num_labels as u64).flat_map(|l| h.cells(l).collect::<Vec<_>>()).collect()
        }))
    }

    /// Writes the scores of real labels `0..m` at `v` into `out`.
    pub fn dense_scores(&self, v: usize, out: &mut [f64]) {
        let m = self.num_labels;
        assert_eq!(out.len(), m);
        match &self.store {
            LabelStore::Exact(rows) => {
                out.fill(0.0);
                for (l, s) in rows[v].iter() {
                    if (l as usize) < m {
                        out[l as usize] = s;
                    }
                }
            }
            LabelStore::Sketch(sk) => {
                let Some(cells) = self.label_cells() else { return };
                let d = sk[v].params().depth();
                for (l, slot) in out.iter_mut().enumerate() {
                    *slot = sk[v].query_cells(&cells[l * d..(l + 1) * d]);
                }
            }
        }
    }

    /// Up to `k` real labels by descending score, ties by ascending label
    /// id; zero scores are skipped.
    pub fn top_k(&self, v: usize, k: usize) -> Vec<(u32, f64)> {
        let dummy = self.dummy_label();
        let mut ranked: Vec<(u32, f64)> = match &self.store {
            LabelStore::Exact(rows) => rows[v].iter().filter(|&(l, s)| l != dummy && s > 0.0).collect(),
            LabelStore::Sketch(_) => {
                let mut buf = vec![0.0; self.num_labels];
                self.dense_scores(v, &mut buf);
                buf.into_iter().enumerate().filter(|p| p.1 > 0.0).map(|(l, s)| (l as u32, s)).collect()
            }
        };
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }

    /// Largest per-node L1 change between two states of the same store.
    /// Sketch states compare counter grids (mean per-row L1).
    pub fn max_delta(&self, other: &LabelState, par: Parallelism) -> Result<f64, SolverError> {
        match (&self.store, &other.store) {
            (LabelStore::Exact(a), LabelStore::Exact(b)) if a.len() == b.len() => {
                Ok(map_nodes(par, a.len(), |v| a[v].l1_distance(&b[v])).into_iter().fold(0.0, f64::max))
            }
            (LabelStore::Sketch(a), LabelStore::Sketch(b)) if a.len() == b.len() => {
                let deltas = map_nodes(par, a.len(), |v| a[v].row_l1_distance(&b[v]));
                let mut max: f64 = 0.0;
                for d in deltas {
                    max = max.max(d?);
                }
                Ok(max)
            }
            _ => Err(SolverError::Config("states differ in backend or size".into())),
        }
    }
}
