use std::io::{self, Write};

use crate::graph::LabelDist;
use crate::solver::{LabelState, SolverError};

use super::{invalid, MetricsError};

/// Which nodes contribute to the mean score at rank `r`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Aggregation {
    /// Every node; a node with fewer than `r` non-zeros contributes 0.
    #[default]
    AllNodes,
    /// Only nodes with at least `r` non-zeros.
    NonZero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewReport {
    /// `(rank, mean score)` for ranks `1..`, up to the rank limit.
    pub points: Vec<(usize, f64)>,
    /// Negated slope of the log-log least-squares line.
    pub z: f64,
    pub fit_range: (usize, usize),
}

/// Mean r-th largest real-label score across nodes, and a power-law fit.
///
/// `rank_limit` defaults to `min(m, 1000)`. The fit covers ranks from 1 to
/// the last rank with a positive mean inside the limit.
pub fn skew_report(
    state: &LabelState,
    rank_limit: Option<usize>,
    aggregation: Aggregation,
) -> Result<SkewReport, MetricsError> {
    let rows = state.exact_rows().ok_or(SolverError::WrongBackend("exact"))?;
    let m = state.num_labels();
    let limit = rank_limit.unwrap_or(m.min(1000)).min(m);
    if limit == 0 {
        return Err(invalid("rank_limit", "must be >= 1"));
    }
    let dummy = state.dummy_label();
    let mut sums = vec![0.0; limit];
    let mut counts = vec![0usize; limit];
    let mut sorted = Vec::new();
    for row in rows {
        sorted.clear();
        sorted.extend(row.iter().filter(|&(l, s)| l != dummy && s > 0.0).map(|(_, s)| s));
        sorted.sort_by(|a, b| b.total_cmp(a));
        for (r, &s) in sorted.iter().take(limit).enumerate() {
            sums[r] += s;
            counts[r] += 1;
        }
    }
    let points: Vec<(usize, f64)> = (0..limit)
        .map(|r| {
            let denom = match aggregation {
                Aggregation::AllNodes => rows.len(),
                Aggregation::NonZero => counts[r],
            };
            (r + 1, if denom == 0 { 0.0 } else { sums[r] / denom as f64 })
        })
        .collect();
    let last = points.iter().take_while(|p| p.1 > 0.0).count();
    if last == 0 {
        return Err(MetricsError::AllZero);
    }
    if last < 2 {
        return Err(invalid("state", "fewer than two ranks carry positive scores; no slope to fit"));
    }
    let z = -log_log_slope(&points[..last]);
    Ok(SkewReport { points, z, fit_range: (1, last) })
}

fn log_log_slope(points: &[(usize, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `rank,mean_score` CSV.
pub fn write_skew_csv<W: Write>(report: &SkewReport, mut out: W) -> io::Result<()> {
    writeln!(out, "rank,mean_score")?;
    for &(r, s) in &report.points {
        writeln!(out, "{r},{s}")?;
    }
    Ok(())
}

/// Total weight outside the `k` largest components.
pub fn tail_weight(dist: &LabelDist, k: usize) -> f64 {
    let values: Vec<f64> = dist.iter().map(|(_, y)| y).collect();
    tail_weight_values(&values, k)
}

pub fn tail_weight_values(values: &[f64], k: usize) -> f64 {
    if k >= values.len() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted[k..].iter().sum()
}
