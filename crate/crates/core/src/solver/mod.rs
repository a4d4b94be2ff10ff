//! Label propagation engines.
//!
//! Two methods, each over two label stores:
//!
//! - MAD: `Y_v ← (μ1·S_vv·Q_v + μ2·Σ_u (W'_uv + W'_vu)·Y_u + μ3·R_v) / M_vv`.
//! - Harmonic: seeds clamped to `Q_v`, every other node set to the
//!   `W`-weighted average of its neighbours.
//!
//! The exact store keeps a sparse [`LabelDist`] per node. The sketch store
//! keeps one [`CountMinSketch`] per node, all sharing one hash family, and
//! evaluates the same update with [`CountMinSketch::axpy`] and
//! [`CountMinSketch::scale`] only; labels are never unpacked during
//! propagation.
//!
//! Iterations are synchronous: every node of iteration `t + 1` reads only
//! iteration-`t` state, and each node sums its neighbours in CSR order, so
//! sequential and parallel runs agree bit for bit.

mod exact;
mod report;
mod sketch;
mod state;

use std::borrow::Cow;
use std::time::Instant;

use thiserror::Error;

use crate::cms::{CmsError, CountMinSketch, SketchParams};
use crate::graph::{build_weights, Graph, GraphError, PropagationWeights, SeedSet, WeightMode};
use crate::par::Parallelism;

pub use report::{resident_set_bytes, IterationStats, RunReport};
pub use state::{LabelState, LabelStore};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cms(#[from] CmsError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("node {id} out of range for {n} nodes")]
    UnknownNode { id: usize, n: usize },
    #[error("operation needs the {0} backend")]
    WrongBackend(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Backend {
    Exact,
    Sketch(SketchParams),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    #[default]
    Mad,
    Harmonic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub iterations: usize,
    /// Stop early once the largest per-node L1 change falls below this.
    pub convergence_delta: Option<f64>,
    pub backend: Backend,
    pub method: Method,
    /// Used when the propagator derives its own weights.
    pub weight_mode: WeightMode,
    /// Exact rows drop entries below this score.
    pub prune_threshold: f64,
    pub parallelism: Parallelism,
    /// Require `μ1 + μ2 + μ3 ≤ 1` for the sketch error guarantee; when it
    /// fails a warning is logged and [`RunReport::guarantee`] is cleared.
    pub assert_guarantee: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu1: 0.98,
            mu2: 0.01,
            mu3: 0.01,
            iterations: 10,
            convergence_delta: None,
            backend: Backend::Exact,
            method: Method::Mad,
            weight_mode: WeightMode::default(),
            prune_threshold: 1e-12,
            parallelism: Parallelism::Sequential,
            assert_guarantee: false,
        }
    }
}

impl SolverConfig {
    pub fn with_backend(self, backend: Backend) -> Self {
        Self { backend, ..self }
    }

    fn validate(&self) -> Result<(), SolverError> {
        for (name, mu) in [("mu1", self.mu1), ("mu2", self.mu2), ("mu3", self.mu3)] {
            if !(mu >= 0.0) || !mu.is_finite() {
                return Err(SolverError::Config(format!("{name} must be finite and >= 0, got {mu}")));
            }
        }
        if let Some(d) = self.convergence_delta {
            if !(d >= 0.0) {
                return Err(SolverError::Config(format!("convergence delta must be >= 0, got {d}")));
            }
        }
        if !(self.prune_threshold >= 0.0) {
            return Err(SolverError::Config("prune threshold must be >= 0".into()));
        }
        Ok(())
    }
}

/// Everything an iteration reads besides the previous state.
#[derive(Debug)]
pub struct Propagator<'a> {
    graph: &'a Graph,
    seeds: &'a SeedSet,
    weights: Option<Cow<'a, PropagationWeights>>,
    config: SolverConfig,
    /// Sketch backend only: the constant part of each node's update, i.e.
    /// `μ1·S_vv·𝕊_Q,v + μ3·𝕊_R,v` for MAD and `𝕊_Q,v` for harmonic.
    priors: Vec<Option<CountMinSketch>>,
    guarantee: bool,
}

impl<'a> Propagator<'a> {
    /// Derives MAD weights from `config.weight_mode` when needed.
    pub fn new(graph: &'a Graph, seeds: &'a SeedSet, config: SolverConfig) -> Result<Self, SolverError> {
        let weights = match config.method {
            Method::Mad => Some(Cow::Owned(build_weights(
                graph,
                seeds,
                config.weight_mode,
                config.mu1,
                config.mu2,
                config.mu3,
            )?)),
            Method::Harmonic => None,
        };
        Self::assemble(graph, seeds, weights, config)
    }

    /// Uses precomputed weights. Their μ values take precedence over the
    /// ones in `config` for the normaliser, so they should agree.
    pub fn with_weights(
        graph: &'a Graph,
        seeds: &'a SeedSet,
        weights: &'a PropagationWeights,
        config: SolverConfig,
    ) -> Result<Self, SolverError> {
        if weights.mu() != [config.mu1, config.mu2, config.mu3] {
            return Err(SolverError::Config("weights were built with different mu values".into()));
        }
        Self::assemble(graph, seeds, Some(Cow::Borrowed(weights)), config)
    }

    fn assemble(
        graph: &'a Graph,
        seeds: &'a SeedSet,
        weights: Option<Cow<'a, PropagationWeights>>,
        config: SolverConfig,
    ) -> Result<Self, SolverError> {
        config.validate()?;
        let n = graph.node_count();
        if seeds.node_count() != n {
            return Err(SolverError::Config(format!("seed set has {} nodes, graph has {n}", seeds.node_count())));
        }
        if let Some(w) = &weights {
            if w.node_count() != n {
                return Err(SolverError::Config("weights do not match the graph".into()));
            }
        }
        if config.method == Method::Harmonic {
            let isolated = (0..n).filter(|&v| !seeds.is_seeded(v) && graph.degree(v) == 0.0).count();
            if isolated > 0 {
                log::warn!("{isolated} unlabeled node(s) have no edges and stay at zero");
            }
        }

        let mut guarantee = false;
        if config.assert_guarantee {
            let total = config.mu1 + config.mu2 + config.mu3;
            if matches!(config.backend, Backend::Sketch(_)) && total <= 1.0 + 1e-12 {
                guarantee = true;
            } else {
                log::warn!("sketch error guarantee needs the sketch backend and mu1 + mu2 + mu3 <= 1 (got {total}); flag cleared");
            }
        }

        let mut prop = Self { graph, seeds, weights, config, priors: Vec::new(), guarantee };
        if let Backend::Sketch(params) = prop.config.backend {
            prop.priors = sketch::build_priors(&prop, params);
        }
        Ok(prop)
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn weights(&self) -> Option<&PropagationWeights> {
        self.weights.as_deref()
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn seeds(&self) -> &SeedSet {
        self.seeds
    }

    /// `Y^(0) = Q`, or for the sketch backend `𝕊_Y,v^(0) = 𝕊_Q,v`.
    pub fn initial_state(&self) -> LabelState {
        LabelState::initial(self.seeds, self.config.backend)
    }

    /// One synchronous iteration.
    pub fn step(&self, state: &LabelState) -> Result<LabelState, SolverError> {
        if state.node_count() != self.graph.node_count() {
            return Err(SolverError::Config("state does not match the graph".into()));
        }
        match (&state.store, self.config.backend) {
            (LabelStore::Exact(_), Backend::Exact) => {}
            (LabelStore::Sketch(sk), Backend::Sketch(p)) if sk.iter().all(|s| *s.params() == p) => {}
            (LabelStore::Exact(_), _) => return Err(SolverError::WrongBackend("exact")),
            (LabelStore::Sketch(_), _) => return Err(SolverError::WrongBackend("sketch")),
        }
        let store = match (&state.store, self.config.method) {
            (LabelStore::Exact(rows), Method::Mad) => LabelStore::Exact(exact::mad_step(self, rows)),
            (LabelStore::Exact(rows), Method::Harmonic) => LabelStore::Exact(exact::harmonic_step(self, rows)),
            (LabelStore::Sketch(sk), Method::Mad) => LabelStore::Sketch(sketch::mad_step(self, sk)?),
            (LabelStore::Sketch(sk), Method::Harmonic) => LabelStore::Sketch(sketch::harmonic_step(self, sk)?),
        };
        Ok(LabelState::from_store(store, state.iteration + 1, state.num_labels))
    }

    pub fn run(&self) -> Result<(LabelState, RunReport), SolverError> {
        self.run_from(self.initial_state())
    }

    /// Iterates `config.iterations` times from `state`, or until the largest
    /// per-node change drops below `config.convergence_delta`.
    pub fn run_from(&self, mut state: LabelState) -> Result<(LabelState, RunReport), SolverError> {
        let mut report = RunReport {
            initial_entries: state.store_entries(),
            initial_bytes: state.store_bytes(),
            guarantee: self.guarantee,
            ..RunReport::default()
        };
        for _ in 0..self.config.iterations {
            let start = Instant::now();
            let next = self.step(&state)?;
            let wall = start.elapsed();
            let max_delta = match self.config.convergence_delta {
                Some(_) => Some(state.max_delta(&next, self.config.parallelism)?),
                None => None,
            };
            report.iterations.push(IterationStats {
                iteration: next.iteration(),
                wall,
                store_entries: next.store_entries(),
                store_bytes: next.store_bytes(),
                max_delta,
                rss_bytes: resident_set_bytes(),
            });
            state = next;
            if let (Some(limit), Some(delta)) = (self.config.convergence_delta, max_delta) {
                if delta < limit {
                    report.converged = true;
                    break;
                }
            }
        }
        report.executed = report.iterations.len();
        Ok((state, report))
    }
}

/// Builds a [`Propagator`] for `config` and runs it.
pub fn run(graph: &Graph, seeds: &SeedSet, config: SolverConfig) -> Result<(LabelState, RunReport), SolverError> {
    Propagator::new(graph, seeds, config)?.run()
}

fn check_step_inputs(state: &LabelState, config: &SolverConfig, method: Method) -> Result<SolverConfig, SolverError> {
    let mut cfg = config.clone();
    cfg.method = method;
    cfg.backend = match (&state.store, config.backend) {
        (LabelStore::Exact(_), _) => Backend::Exact,
        (LabelStore::Sketch(sk), _) => match sk.first() {
            Some(s) => Backend::Sketch(*s.params()),
            None => config.backend,
        },
    };
    Ok(cfg)
}

/// One MAD iteration on the exact store.
pub fn mad_exact_step(
    state: &LabelState,
    graph: &Graph,
    weights: &PropagationWeights,
    seeds: &SeedSet,
    config: &SolverConfig,
) -> Result<LabelState, SolverError> {
    if !matches!(state.store, LabelStore::Exact(_)) {
        return Err(SolverError::WrongBackend("exact"));
    }
    let cfg = check_step_inputs(state, config, Method::Mad)?;
    Propagator::with_weights(graph, seeds, weights, cfg)?.step(state)
}

/// One MAD iteration on the sketch store.
pub fn mad_sketch_step(
    state: &LabelState,
    graph: &Graph,
    weights: &PropagationWeights,
    seeds: &SeedSet,
    config: &SolverConfig,
) -> Result<LabelState, SolverError> {
    if !matches!(state.store, LabelStore::Sketch(_)) {
        return Err(SolverError::WrongBackend("sketch"));
    }
    let cfg = check_step_inputs(state, config, Method::Mad)?;
    Propagator::with_weights(graph, seeds, weights, cfg)?.step(state)
}

/// One harmonic iteration on whichever store `state` uses.
pub fn harmonic_step(state: &LabelState, graph: &Graph, seeds: &SeedSet) -> Result<LabelState, SolverError> {
    let cfg = check_step_inputs(state, &SolverConfig::default(), Method::Harmonic)?;
    Propagator::new(graph, seeds, cfg)?.step(state)
}

#[cfg(test)]
mod tests;
