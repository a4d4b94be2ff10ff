//! Graph-based semi-supervised label propagation with exact and
//! count-min-sketch label stores.
//!
//! The crate is organised around the propagation pipeline:
//!
//! - [`cms`]: the count-min sketch used as a compact per-node label store.
//! - [`graph`]: edge-list ingestion, seed sets, the random-walk
//!   probabilities and modified weights Modified Adsorption (MAD) needs,
//!   and conductance measures.
//! - [`solver`]: MAD and harmonic propagation over either backend.
//! - [`metrics`]: sketch sizing, approximation error, MRR and label-skew
//!   analysis.
//! - [`synth`]: deterministic synthetic datasets with verified structure.
//! - [`cli`]: the `madsketch` command line.
//!
//! Node updates inside an iteration run in parallel through rayon when the
//! `parallel` feature is enabled (the default); without it every
//! [`par::Parallelism`] request runs sequentially.

pub mod cli;
pub mod cms;
pub mod graph;
pub mod metrics;
pub mod par;
pub mod solver;
pub mod synth;

pub use cms::{CmsError, CountMinSketch, HashFamily, SketchParams};
pub use graph::{Graph, GraphError, LabelDist, PropagationWeights, SeedSet, WeightMode};
pub use metrics::{MetricsError, SizingRegime, SizingSpec, SketchSize};
pub use par::Parallelism;
pub use solver::{Backend, LabelState, Method, RunReport, SolverConfig, SolverError};
pub use synth::{Dataset, SynthError, SynthSpec};

