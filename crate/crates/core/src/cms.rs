//! Count-min sketch over real-valued counters.
//!
//! A sketch is a `depth × width` grid of `f64` counters plus one
//! Carter–Wegman hash per row, `h_j(i) = ((a_j·i + b_j) mod p) mod width`
//! with `p = 2^61 − 1`. Updates add the value to one cell per row and
//! queries return the row-wise minimum, so for non-negative update streams
//! a query never underestimates.
//!
//! Sketches built from the same [`SketchParams`] share a hash family and
//! form a vector space: [`CountMinSketch::axpy`] and
//! [`CountMinSketch::scale`] act on the counter grid and the result is the
//! sketch of the corresponding linear combination of the summarised
//! vectors. Label propagation relies on this to mix neighbour sketches
//! without ever unpacking them.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// The Mersenne prime `2^61 − 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

const MAGIC: &[u8; 4] = b"CMS1";
const HEADER_LEN: usize = 4 + 4 + 4 + 8;

#[derive(Debug, Error, PartialEq)]
pub enum CmsError {
    #[error("invalid sketch parameter {field}: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("incompatible sketches: {left} vs {right}")]
    Incompatible { left: SketchParams, right: SketchParams },
    #[error("corrupt sketch stream at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SketchParams {
    width: usize,
    depth: usize,
    hash_seed: u64,
}

impl SketchParams {
    pub fn new(width: usize, depth: usize, hash_seed: u64) -> Result<Self, CmsError> {
        for (field, value) in [("width", width), ("depth", depth)] {
            if value == 0 {
                return Err(CmsError::InvalidParams { field, reason: "must be at least 1".into() });
            }
            if value > u32::MAX as usize {
                return Err(CmsError::InvalidParams {
                    field,
                    reason: format!("{value} does not fit in 32 bits"),
                });
            }
        }
        Ok(Self { width, depth, hash_seed })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn hash_seed(&self) -> u64 {
        self.hash_seed
    }

    /// Number of counters in one sketch.
    pub fn cells(&self) -> usize {
        self.width * self.depth
    }

    pub fn with_seed(self, hash_seed: u64) -> Self {
        Self { hash_seed, ..self }
    }
}

impl fmt::Display for SketchParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w={} d={} seed={}", self.width, self.depth, self.hash_seed)
    }
}

#[inline]
fn mod_mersenne(x: u128) -> u64 {
    let p = MERSENNE_61 as u128;
    let mut t = (x & p) + (x >> 61);
    t = (t & p) + (t >> 61);
    let t = t as u64;
    if t >= MERSENNE_61 {
        t - MERSENNE_61
    } else {
        t
    }
}

/// `d` pairwise-independent hash functions into `[0, width)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashFamily {
    width: u64,
    coefficients: Vec<(u64, u64)>,
}

impl HashFamily {
    /// Draws `(a_j, b_j)` for every row. Row `j` uses ChaCha8 stream `j`
    /// keyed by `hash_seed`, so a row's coefficients do not depend on the
    /// depth of the sketch.
    pub fn from_params(params: &SketchParams) -> Self {
        let coefficients = (0..params.depth)
            .map(|j| {
                let mut rng = ChaCha8Rng::seed_from_u64(params.hash_seed);
                rng.set_stream(j as u64);
                let a = rng.gen_range(1..MERSENNE_61);
                let b = rng.gen_range(0..MERSENNE_61);
                (a, b)
            })
            .collect();
        Self { width: params.width as u64, coefficients }
    }

    fn from_coefficients(width: usize, coefficients: Vec<(u64, u64)>) -> Self {
        Self { width: width as u64, coefficients }
    }

    pub fn depth(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[(u64, u64)] {
        &self.coefficients
    }

    /// Column of item `i` in row `j`.
    #[inline]
    pub fn hash(&self, j: usize, i: u64) -> usize {
        let (a, b) = self.coefficients[j];
        let x = i % MERSENNE_61;
        let v = mod_mersenne(a as u128 * x as u128 + b as u128);
        (v % self.width) as usize
    }

    /// Flat counter indices (row-major) touched by item `i`, one per row.
    pub fn cells(&self, i: u64) -> impl Iterator<Item = usize> + '_ {
        let w = self.width as usize;
        (0..self.depth()).map(move |j| j * w + self.hash(j, i))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountMinSketch {
    params: SketchParams,
    hashes: Arc<HashFamily>,
    counters: Vec<f64>,
}

impl CountMinSketch {
    pub fn new(params: SketchParams) -> Self {
        Self::with_hashes(params, Arc::new(HashFamily::from_params(&params)))
    }

    /// An all-zero sketch sharing an existing hash family. The family must
    /// have been derived from `params`.
    pub fn with_hashes(params: SketchParams, hashes: Arc<HashFamily>) -> Self {
        debug_assert_eq!(hashes.depth(), params.depth);
        Self { params, hashes, counters: vec![0.0; params.cells()] }
    }

    /// A zero sketch with the same parameters and hash family as `self`.
    pub fn zeroed_like(&self) -> Self {
        Self::with_hashes(self.params, Arc::clone(&self.hashes))
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn hashes(&self) -> &Arc<HashFamily> {
        &self.hashes
    }

    /// Row-major counter grid.
    pub fn counters(&self) -> &[f64] {
        &self.counters
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let w = self.params.width;
        &self.counters[j * w..(j + 1) * w]
    }

    /// Adds `y` to item `i`. Negative values are accepted, but then a query
    /// may underestimate.
    pub fn update(&mut self, i: u64, y: f64) {
        let w = self.params.width;
        for j in 0..self.params.depth {
            self.counters[j * w + self.hashes.hash(j, i)] += y;
        }
    }

    pub fn query(&self, i: u64) -> f64 {
        self.hashes
            .cells(i)
            .map(|c| self.counters[c])
            .fold(f64::INFINITY, f64::min)
    }

    /// Query through precomputed flat cell indices (see [`HashFamily::cells`]).
    pub fn query_cells(&self, cells: &[usize]) -> f64 {
        cells.iter().map(|&c| self.counters[c]).fold(f64::INFINITY, f64::min)
    }

    pub fn is_compatible(&self, other: &CountMinSketch) -> bool {
        self.params == other.params
    }

    fn check_compatible(&self, other: &CountMinSketch) -> Result<(), CmsError> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(CmsError::Incompatible { left: self.params, right: other.params })
        }
    }

    /// `self ← self + a·src`.
    pub fn axpy(&mut self, a: f64, src: &CountMinSketch) -> Result<(), CmsError> {
        self.check_compatible(src)?;
        for (d, s) in self.counters.iter_mut().zip(&src.counters) {
            *d += a * s;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        self.counters.iter_mut().for_each(|c| *c *= a);
    }

    /// Sum of absolute counter differences divided by depth, i.e. the mean
    /// per-row L1 distance between the two grids.
    pub fn row_l1_distance(&self, other: &CountMinSketch) -> Result<f64, CmsError> {
        self.check_compatible(other)?;
        let total: f64 = self
            .counters
            .iter()
            .zip(&other.counters)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(total / self.params.depth as f64)
    }

    /// Encodes the sketch as `"CMS1"`, `w: u32`, `d: u32`, `seed: u64`,
    /// `d × (a: u64, b: u64)`, then `d·w` `f64` counters row-major, all
    /// little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * self.params.depth + 8 * self.counters.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.params.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.params.depth as u32).to_le_bytes());
        out.extend_from_slice(&self.params.hash_seed.to_le_bytes());
        for &(a, b) in &self.hashes.coefficients {
            out.extend_from_slice(&a.to_le_bytes());
            out.extend_from_slice(&b.to_le_bytes());
        }
        for c in &self.counters {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CmsError> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4, "magic")?;
        if magic != MAGIC {
            return Err(CmsError::Format { offset: 0, reason: "bad magic".into() });
        }
        let width = r.u32("width")? as usize;
        let depth = r.u32("depth")? as usize;
        let hash_seed = r.u64("hash_seed")?;
        let params = SketchParams::new(width, depth, hash_seed)
            .map_err(|e| CmsError::Format { offset: 4, reason: e.to_string() })?;

        let need = (depth as u128) * 16 + (params.cells() as u128) * 8;
        let have = (bytes.len() - r.pos) as u128;
        if need != have {
            return Err(CmsError::Format {
                offset: r.pos,
                reason: format!("header declares {need} payload bytes, stream has {have}"),
            });
        }

        let mut coefficients = Vec::with_capacity(depth);
        for _ in 0..depth {
            let at = r.pos;
            let a = r.u64("hash coefficient")?;
            let b = r.u64("hash coefficient")?;
            if a == 0 || a >= MERSENNE_61 || b >= MERSENNE_61 {
                return Err(CmsError::Format { offset: at, reason: "hash coefficient out of range".into() });
            }
            coefficients.push((a, b));
        }
        let mut counters = Vec::with_capacity(params.cells());
        for _ in 0..params.cells() {
            counters.push(f64::from_bits(r.u64("counter")?));
        }
        Ok(Self {
            params,
            hashes: Arc::new(HashFamily::from_coefficients(width, coefficients)),
            counters,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], CmsError> {
        if self.bytes.len() - self.pos < n {
            return Err(CmsError::Format {
                offset: self.pos,
                reason: format!("truncated while reading {what}"),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, CmsError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64, CmsError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}
