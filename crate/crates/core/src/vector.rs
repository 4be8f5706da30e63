//! Sparse vectors and exact inner products.

use crate::error::{Error, Result};

/// A sparse vector: an external identifier plus active coordinates stored as
/// two parallel arrays, coordinates strictly increasing, values finite and
/// nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    ext_id: u64,
    coords: Vec<u32>,
    values: Vec<f32>,
}

impl SparseVector {
    /// Builds a vector from parallel coordinate/value arrays, validating the
    /// invariants.
    pub fn new(ext_id: u64, coords: Vec<u32>, values: Vec<f32>) -> Result<Self> {
        if coords.len() != values.len() {
            return Err(Error::InvalidVector {
                ext_id,
                reason: format!("{} coordinates but {} values", coords.len(), values.len()),
            });
        }
        for w in coords.windows(2) {
            if w[0] >= w[1] {
                let reason = if w[0] == w[1] {
                    format!("duplicate coordinate {}", w[0])
                } else {
                    format!("coordinates not increasing at {} -> {}", w[0], w[1])
                };
                return Err(Error::InvalidVector { ext_id, reason });
            }
        }
        for (&c, &v) in coords.iter().zip(&values) {
            if !v.is_finite() {
                return Err(Error::InvalidVector {
                    ext_id,
                    reason: format!("non-finite value at coordinate {c}"),
                });
            }
            if v == 0.0 {
                return Err(Error::InvalidVector {
                    ext_id,
                    reason: format!("zero value at coordinate {c}"),
                });
            }
        }
        Ok(Self { ext_id, coords, values })
    }

    /// Builds a vector from `(coordinate, value)` pairs in any order.
    pub fn from_pairs(ext_id: u64, pairs: impl IntoIterator<Item = (u32, f32)>) -> Result<Self> {
        let mut pairs: Vec<(u32, f32)> = pairs.into_iter().collect();
        pairs.sort_by_key(|&(c, _)| c);
        let (coords, values) = pairs.into_iter().unzip();
        Self::new(ext_id, coords, values)
    }

    pub fn empty(ext_id: u64) -> Self {
        Self { ext_id, coords: Vec::new(), values: Vec::new() }
    }

    #[inline]
    pub fn ext_id(&self) -> u64 {
        self.ext_id
    }

    #[inline]
    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    #[inline]
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Number of active coordinates.
    #[inline]
    pub fn nnz(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f32)> + '_ {
        self.coords.iter().copied().zip(self.values.iter().copied())
    }

    /// Value at `coord`, or `None` when inactive.
    pub fn get(&self, coord: u32) -> Option<f32> {
        self.coords.binary_search(&coord).ok().map(|i| self.values[i])
    }

    pub fn with_ext_id(mut self, ext_id: u64) -> Self {
        self.ext_id = ext_id;
        self
    }

    /// Checks every coordinate lies in `[0, dims)`.
    pub fn check_dims(&self, dims: u32) -> Result<()> {
        match self.coords.last() {
            Some(&c) if c >= dims => {
                Err(Error::CoordOutOfRange { ext_id: self.ext_id, coord: c, dims })
            }
            _ => Ok(()),
        }
    }

    /// Active coordinates ordered by descending `|value|`, ties by ascending
    /// coordinate. This is the processing order of the anytime scorers.
    pub fn coords_by_magnitude(&self) -> Vec<(u32, f32)> {
        let mut order: Vec<(u32, f32)> = self.iter().collect();
        order.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        order
    }
}

/// Exact inner product over the intersection of active coordinates,
/// accumulated in `f64` in ascending coordinate order.
pub fn inner_product(a: &SparseVector, b: &SparseVector) -> f64 {
    let (ac, av) = (a.coords(), a.values());
    let (bc, bv) = (b.coords(), b.values());
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0f64;
    while i < ac.len() && j < bc.len() {
        match ac[i].cmp(&bc[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += av[i] as f64 * bv[j] as f64;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}
