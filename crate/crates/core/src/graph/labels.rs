use indexmap::IndexSet;

use super::GraphError;

/// A sparse label → score row, sorted by label id, scores non-negative.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabelDist {
    entries: Vec<(u32, f64)>,
}

impl LabelDist {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from arbitrary pairs; duplicate labels are summed.
    pub fn from_pairs<I: IntoIterator<Item = (u32, f64)>>(pairs: I) -> Self {
        let mut entries: Vec<(u32, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(l, _)| l);
        entries.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        Self { entries }
    }

    /// Wraps entries that are already sorted by label with no duplicates.
    pub(crate) fn from_sorted(entries: Vec<(u32, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|p| p[0].0 < p[1].0));
        Self { entries }
    }

    pub fn get(&self, label: u32) -> f64 {
        match self.entries.binary_search_by_key(&label, |&(l, _)| l) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn l1(&self) -> f64 {
        self.entries.iter().map(|&(_, s)| s.abs()).sum()
    }

    /// `Σ_ℓ |a_ℓ − b_ℓ|` over the union of supports.
    pub fn l1_distance(&self, other: &LabelDist) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    acc += (x.1 - y.1).abs();
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x.0 < y.0 => {
                    acc += x.1.abs();
                    i += 1;
                }
                (Some(x), None) => {
                    acc += x.1.abs();
                    i += 1;
                }
                (_, Some(y)) => {
                    acc += y.1.abs();
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        acc
    }

    /// Keeps only the listed labels.
    pub fn restrict(&self, labels: &[u32]) -> LabelDist {
        LabelDist::from_pairs(labels.iter().map(|&l| (l, self.get(l))).filter(|&(_, s)| s != 0.0))
    }

    /// Entries sorted by score descending, ties by label id ascending.
    pub fn ranked(&self) -> Vec<(u32, f64)> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }
}

/// Seed labels `Q` plus the label vocabulary.
///
/// Label ids are `0..m` in vocabulary order; id `m` is reserved for the
/// dummy (abandonment) label and never appears in `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedSet {
    labels: IndexSet<String>,
    entries: Vec<(usize, u32, f64)>,
    rows: Vec<LabelDist>,
}

impl SeedSet {
    /// `entries` are `(node, label, score)` with `node < n`, `label <
    /// labels.len()` and `score > 0`.
    pub fn new(n: usize, labels: IndexSet<String>, entries: Vec<(usize, u32, f64)>) -> Result<Self, GraphError> {
        let m = labels.len();
        let mut per_node: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(v, l, s) in &entries {
            if v >= n {
                return Err(GraphError::NodeOutOfRange { id: v, n });
            }
            if l as usize >= m {
                return Err(GraphError::InvalidParameter {
                    field: "label",
                    reason: format!("label id {l} outside a vocabulary of {m}"),
                });
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(GraphError::InvalidParameter {
                    field: "score",
                    reason: format!("seed score must be positive, got {s}"),
                });
            }
            per_node[v].push((l, s));
        }
        let rows = per_node.into_iter().map(LabelDist::from_pairs).collect();
        Ok(Self { labels, entries, rows })
    }

    /// `m`, the number of real labels.
    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    /// Id of the reserved dummy label, `m`.
    pub fn dummy_label(&self) -> u32 {
        self.labels.len() as u32
    }

    pub fn labels(&self) -> &IndexSet<String> {
        &self.labels
    }

    pub fn label_id(&self, name: &str) -> Option<u32> {
        self.labels.get_index_of(name).map(|i| i as u32)
    }

    pub fn label_name(&self, id: u32) -> Option<&str> {
        self.labels.get_index(id as usize).map(String::as_str)
    }

    pub fn entries(&self) -> &[(usize, u32, f64)] {
        &self.entries
    }

    /// `Q_v`.
    pub fn row(&self, v: usize) -> &LabelDist {
        &self.rows[v]
    }

    /// `S_vv`.
    pub fn is_seeded(&self, v: usize) -> bool {
        !self.rows[v].is_empty()
    }

    pub fn seed_node_count(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_empty()).count()
    }

    /// `max_v Σ_ℓ Q_vℓ`.
    pub fn k_sparsity(&self) -> f64 {
        self.rows.iter().map(LabelDist::l1).fold(0.0, f64::max)
    }

    pub fn is_binary(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|(_, s)| s == 1.0))
    }

    pub fn require_k_sparse(&self, k: f64) -> Result<(), GraphError> {
        let found = self.k_sparsity();
        if found > k {
            Err(GraphError::NotKSparse { declared: k, found })
        } else {
            Ok(())
        }
    }
}
