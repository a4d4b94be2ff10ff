use std::io::{self, Write};
use std::time::Duration;

#[derive(Clone, Debug, PartialEq)]
pub struct IterationStats {
    /// 1-based iteration index.
    pub iteration: usize,
    pub wall: Duration,
    pub store_entries: usize,
    pub store_bytes: usize,
    /// Largest per-node L1 change; only computed when an early-stop delta
    /// is configured.
    pub max_delta: Option<f64>,
    /// Process resident set size, where the platform exposes it.
    pub rss_bytes: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub iterations: Vec<IterationStats>,
    pub executed: usize,
    pub converged: bool,
    pub initial_entries: usize,
    pub initial_bytes: usize,
    /// Whether the sketch error guarantee preconditions were asserted and
    /// hold.
    pub guarantee: bool,
}

impl RunReport {
    pub fn total_wall(&self) -> Duration {
        self.iterations.iter().map(|i| i.wall).sum()
    }

    /// Mean label-store bytes over executed iterations (initial state when
    /// none ran).
    pub fn mean_store_bytes(&self) -> f64 {
        if self.iterations.is_empty() {
            return self.initial_bytes as f64;
        }
        self.iterations.iter().map(|i| i.store_bytes as f64).sum::<f64>() / self.iterations.len() as f64
    }

    /// One row per iteration: `iteration, wall_ms, entries, bytes, max_delta,
    /// rss_bytes`, separated by `sep`.
    pub fn write_table<W: Write>(&self, mut out: W, sep: char) -> io::Result<()> {
        writeln!(out, "iteration{sep}wall_ms{sep}store_entries{sep}store_bytes{sep}max_delta{sep}rss_bytes")?;
        for it in &self.iterations {
            let delta = it.max_delta.map(|d| format!("{d:e}")).unwrap_or_else(|| "-".into());
            let rss = it.rss_bytes.map(|r| r.to_string()).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{}{sep}{:.3}{sep}{}{sep}{}{sep}{}{sep}{}",
                it.iteration,
                it.wall.as_secs_f64() * 1e3,
                it.store_entries,
                it.store_bytes,
                delta,
                rss
            )?;
        }
        Ok(())
    }
}

/// Resident set size from `/proc/self/status` on Linux.
pub fn resident_set_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmRSS:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
