use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};

use crate::graph::{load_edges, load_gold, load_node_list, load_seeds, Graph, SeedSet};

use super::InputArgs;

pub(super) fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("{}", path.display()))?;
    Ok(BufReader::new(file))
}

impl InputArgs {
    fn resolve(&self, explicit: &Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
        explicit.clone().or_else(|| self.dataset.as_ref().map(|d| d.join(default_name)))
    }

    fn required(&self, explicit: &Option<PathBuf>, default_name: &str, flag: &str) -> Result<PathBuf> {
        self.resolve(explicit, default_name).ok_or_else(|| anyhow!("missing --{flag} (or --dataset)"))
    }

    pub(super) fn graph(&self) -> Result<Graph> {
        let path = self.required(&self.edges, "edges.tsv", "edges")?;
        load_edges(open(&path)?, !self.directed).with_context(|| format!("{}", path.display()))
    }

    pub(super) fn seeds(&self, graph: &Graph) -> Result<SeedSet> {
        let path = self.required(&self.seeds, "seeds.tsv", "seeds")?;
        load_seeds(open(&path)?, graph).with_context(|| format!("{}", path.display()))
    }

    /// Gold pairs and eval nodes, both optional. Without an eval list every
    /// unseeded gold node is evaluated.
    pub(super) fn evaluation(&self, graph: &Graph, seeds: &SeedSet) -> Result<Option<(Vec<(usize, u32)>, Vec<usize>)>> {
        let Some(gold_path) = self.resolve(&self.gold, "gold.tsv") else {
            return Ok(None);
        };
        if self.gold.is_none() && !gold_path.exists() {
            return Ok(None);
        }
        let gold = load_gold(open(&gold_path)?, graph, seeds.labels())
            .with_context(|| format!("{}", gold_path.display()))?
            .pairs;
        let eval = match self.resolve(&self.eval_nodes, "eval.txt").filter(|p| self.eval_nodes.is_some() || p.exists()) {
            Some(path) => load_node_list(open(&path)?, graph).with_context(|| format!("{}", path.display()))?,
            None => {
                let mut nodes: Vec<usize> = gold.iter().map(|g| g.0).filter(|&v| !seeds.is_seeded(v)).collect();
                nodes.sort_unstable();
                nodes.dedup();
                nodes
            }
        };
        let has_gold: std::collections::HashSet<usize> = gold.iter().map(|g| g.0).collect();
        let total = eval.len();
        let eval: Vec<usize> = eval.into_iter().filter(|v| has_gold.contains(v)).collect();
        if eval.len() < total {
            log::warn!("{} eval node(s) have no gold label in the seed vocabulary; skipped", total - eval.len());
        }
        Ok(Some((gold, eval)))
    }
}
