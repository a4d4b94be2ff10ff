use std::io::{self, Write};

use crate::graph::Graph;
use crate::solver::LabelState;

use super::{invalid, MetricsError};

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub mrr: f64,
    /// `(node, best gold rank)` per evaluated node, in evaluation order.
    pub ranks: Vec<(usize, usize)>,
}

impl EvalResult {
    pub fn evaluated(&self) -> usize {
        self.ranks.len()
    }
}

fn check_shapes(exact: &LabelState, sketch: &LabelState) -> Result<(), MetricsError> {
    if exact.node_count() != sketch.node_count() {
        return Err(MetricsError::Mismatch(format!(
            "{} nodes vs {} nodes",
            exact.node_count(),
            sketch.node_count()
        )));
    }
    if exact.num_labels() != sketch.num_labels() {
        return Err(MetricsError::Mismatch(format!(
            "{} labels vs {} labels",
            exact.num_labels(),
            sketch.num_labels()
        )));
    }
    Ok(())
}

/// Largest overestimate `Ŷ_vl − Y_vl` over all nodes and the given labels.
/// Never negative: a state compared with itself yields 0.
pub fn approximation_error(exact: &LabelState, sketch: &LabelState, labels: &[u32]) -> Result<f64, MetricsError> {
    check_shapes(exact, sketch)?;
    let m = exact.num_labels();
    if let Some(&l) = labels.iter().find(|&&l| l as usize > m) {
        return Err(invalid("labels", format!("label {l} beyond the {m} labels and the dummy")));
    }
    let mut a = vec![0.0; m];
    let mut b = vec![0.0; m];
    let mut worst: f64 = 0.0;
    for v in 0..exact.node_count() {
        exact.dense_scores(v, &mut a);
        sketch.dense_scores(v, &mut b);
        for &l in labels {
            let gap = if (l as usize) < m {
                b[l as usize] - a[l as usize]
            } else {
                sketch.score(v, l) - exact.score(v, l)
            };
            worst = worst.max(gap);
        }
    }
    Ok(worst)
}

/// Rank of `label` when all real labels are sorted by descending score with
/// ties broken by ascending label id.
fn rank_of(scores: &[f64], label: usize) -> usize {
    let s = scores[label];
    1 + scores.iter().enumerate().filter(|&(l, &x)| x > s || (x == s && l < label)).count()
}

/// Mean reciprocal rank of the best-ranked gold label over `eval_nodes`.
///
/// Nodes without any positive score get rank `m`.
pub fn mrr(state: &LabelState, gold: &[(usize, u32)], eval_nodes: &[usize]) -> Result<EvalResult, MetricsError> {
    let n = state.node_count();
    let m = state.num_labels();
    if eval_nodes.is_empty() {
        return Err(invalid("eval_nodes", "no nodes to evaluate"));
    }
    let mut by_node = vec![Vec::new(); n];
    for &(v, l) in gold {
        if v >= n {
            return Err(invalid("gold", format!("node {v} out of range for {n} nodes")));
        }
        if l as usize >= m {
            return Err(invalid("gold", format!("label {l} out of range for {m} labels")));
        }
        by_node[v].push(l as usize);
    }
    let mut scores = vec![0.0; m];
    let mut ranks = Vec::with_capacity(eval_nodes.len());
    let mut empty = 0usize;
    for &v in eval_nodes {
        if v >= n {
            return Err(invalid("eval_nodes", format!("node {v} out of range for {n} nodes")));
        }
        if by_node[v].is_empty() {
            return Err(invalid("gold", format!("eval node {v} has no gold label")));
        }
        state.dense_scores(v, &mut scores);
        let rank = if scores.iter().all(|&s| s <= 0.0) {
            empty += 1;
            m
        } else {
            by_node[v].iter().map(|&l| rank_of(&scores, l)).min().unwrap_or(m)
        };
        ranks.push((v, rank));
    }
    if empty > 0 {
        log::warn!("{empty} eval nodes have no label scores; ranked last");
    }
    let mrr = ranks.iter().map(|&(_, r)| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64;
    Ok(EvalResult { mrr, ranks })
}

/// `node,rank` CSV of per-node best gold ranks.
pub fn write_ranks_csv<W: Write>(result: &EvalResult, graph: &Graph, mut out: W) -> io::Result<()> {
    writeln!(out, "node,rank")?;
    for &(v, r) in &result.ranks {
        writeln!(out, "{},{}", graph.node_name(v), r)?;
    }
    Ok(())
}
