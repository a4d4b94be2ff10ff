use std::f64::consts::E;
use std::fmt;

use crate::cms::{CmsError, SketchParams};

use super::{invalid, MetricsError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SizingRegime {
    /// Seed rows with at most `k` non-zeros.
    Sparse { k: u32 },
    /// Label scores decaying like `rank^-z`, `z > 1`.
    Zipf { z: f64 },
    /// Graphs made of communities with max-conductance `psi`.
    Community { psi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizingSpec {
    pub regime: SizingRegime,
    pub epsilon: f64,
    pub delta: f64,
    pub m: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchSize {
    pub width: usize,
    pub depth: usize,
}

impl SketchSize {
    pub fn params(self, hash_seed: u64) -> Result<SketchParams, CmsError> {
        SketchParams::new(self.width, self.depth, hash_seed)
    }
}

impl fmt::Display for SketchSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w={} d={}", self.width, self.depth)
    }
}

fn open_unit(field: &'static str, x: f64) -> Result<(), MetricsError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must lie in (0, 1), got {x}")))
    }
}

fn ceil_at_least_one(x: f64) -> usize {
    (x.ceil() as usize).max(1)
}

impl SizingSpec {
    pub fn validate(&self) -> Result<(), MetricsError> {
        open_unit("epsilon", self.epsilon)?;
        open_unit("delta", self.delta)?;
        if self.m == 0 {
            return Err(invalid("m", "label count must be >= 1"));
        }
        match self.regime {
            SizingRegime::Sparse { k } if k == 0 => Err(invalid("k", "must be >= 1")),
            SizingRegime::Zipf { z } if !(z > 1.0 && z.is_finite()) => {
                Err(invalid("z", format!("must be finite and > 1, got {z}")))
            }
            SizingRegime::Community { psi } if !(psi > 0.0 && psi <= 1.0) => {
                Err(invalid("psi", format!("must lie in (0, 1], got {psi}")))
            }
            _ => Ok(()),
        }
    }
}

/// Width from the regime, depth `⌈ln(m/δ)⌉`.
pub fn size_sketch(spec: &SizingSpec) -> Result<SketchSize, MetricsError> {
    spec.validate()?;
    let eps = spec.epsilon;
    let width = match spec.regime {
        SizingRegime::Sparse { k } => E * k as f64 / eps,
        SizingRegime::Zipf { z } => E / eps.powf(z - 1.0),
        SizingRegime::Community { psi } => E * psi / eps,
    };
    let depth = (spec.m as f64 / spec.delta).ln();
    Ok(SketchSize { width: ceil_at_least_one(width), depth: ceil_at_least_one(depth) })
}

/// Single-vector point-query sizing: `w = ⌈e/η⌉`, `d = ⌈ln(1/δ)⌉`.
pub fn point_query_size(eta: f64, delta: f64) -> Result<SketchSize, MetricsError> {
    open_unit("eta", eta)?;
    open_unit("delta", delta)?;
    Ok(SketchSize { width: ceil_at_least_one(E / eta), depth: ceil_at_least_one((1.0 / delta).ln()) })
}

/// Tail-bound sizing for a vector with a `k`-element head:
/// `w = max(3k, ⌈e/η⌉)`, `d = ⌈ln(3/2)·ln(1/δ)⌉`.
pub fn tail_bound_size(k: usize, eta: f64, delta: f64) -> Result<SketchSize, MetricsError> {
    open_unit("eta", eta)?;
    open_unit("delta", delta)?;
    if k == 0 {
        return Err(invalid("k", "must be >= 1"));
    }
    let width = (3 * k).max(ceil_at_least_one(E / eta));
    let depth = ceil_at_least_one(1.5f64.ln() * (1.0 / delta).ln());
    Ok(SketchSize { width, depth })
}
