//! Sketching and inner-product errors measured on an actual index.

use crate::budget::Budget;
use crate::error::Result;
use crate::precision::{to_bf16_down, to_bf16_up};
use crate::sinnamon::{Bound, SinnamonIndex};
use crate::storage::VectorStore;
use crate::vector::{inner_product, SparseVector};

/// Error samples gathered from an index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorProfile {
    /// `decoded upper − stored value` per live (slot, active coordinate).
    pub upper: Vec<f64>,
    /// `decoded lower − stored value`; empty for an upper-only sketch.
    pub lower: Vec<f64>,
    /// `sketch score − exact inner product` per (query, document) pair with
    /// at least one shared coordinate.
    pub inner: Vec<f64>,
}

impl ErrorProfile {
    /// Fraction of upper-sketch decodes that overestimate.
    pub fn prob_overestimate(&self) -> f64 {
        fraction(&self.upper, |e| e > 0.0)
    }

    pub fn mean_error(&self) -> f64 {
        self.upper.iter().sum::<f64>() / self.upper.len().max(1) as f64
    }

    /// Empirical `P[Z̄ ≤ δ]` of the upper sketch.
    pub fn ecdf(&self, delta: f64) -> f64 {
        fraction(&self.upper, |e| e <= delta)
    }
}

fn fraction(samples: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    samples.iter().filter(|&&e| pred(e)).count() as f64 / samples.len().max(1) as f64
}

/// Measures decode errors for every live vector and score errors for every
/// query. Errors are taken relative to the value as rounded into 16-bit
/// storage (up for the upper half, down for the lower half), so they reflect
/// collisions only.
pub fn empirical_error_profile(
    index: &SinnamonIndex,
    store: &VectorStore,
    queries: &[SparseVector],
) -> Result<ErrorProfile> {
    let mut profile = ErrorProfile::default();
    let has_lower = index.sketch().has_lower();
    for (slot, ext) in index.id_map().live() {
        for (j, x) in store.fetch(ext)?.iter() {
            let up = index.decode(slot, j, Bound::Upper);
            profile.upper.push(f64::from(up) - f64::from(to_bf16_up(x).to_f32()));
            if has_lower {
                let lo = index.decode(slot, j, Bound::Lower);
                profile.lower.push(f64::from(lo) - f64::from(to_bf16_down(x).to_f32()));
            }
        }
    }
    for q in queries {
        let (scores, _) = index.score(q, Budget::Infinite, 1)?;
        for (slot, ext) in index.id_map().live() {
            let doc = store.fetch(ext)?;
            if doc.coords().iter().any(|&c| q.get(c).is_some()) {
                profile.inner.push(scores[slot as usize] - inner_product(q, doc));
            }
        }
    }
    Ok(profile)
}

/// Equal-width histogram of `samples` over `[lo, hi)` as
/// `(left edge, count)`; samples outside the range are clamped into the end
/// bins.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, usize)> {
    let bins = bins.max(1);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in samples {
        let b = if width > 0.0 { ((s - lo) / width).floor() } else { 0.0 };
        counts[(b.max(0.0) as usize).min(bins - 1)] += 1;
    }
    counts.into_iter().enumerate().map(|(i, c)| (lo + i as f64 * width, c)).collect()
}
