//! Per-query knobs shared by both engines.

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::idmap::IdMap;
use crate::storage::VectorStore;
use crate::topk::{find_largest_iter, Hit, TopKResult};
use crate::vector::{inner_product, SparseVector};

/// Default re-rank pool size.
pub const DEFAULT_K_PRIME: usize = 5_000;

/// Result count `k`, re-rank pool size `k′`, scoring budget and worker count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryParams {
    pub k: usize,
    pub k_prime: usize,
    pub budget: Budget,
    pub threads: usize,
}

impl QueryParams {
    /// `k` results with `k′ = max(k, 5000)`, no budget and one thread.
    pub fn new(k: usize) -> Self {
        Self { k, k_prime: DEFAULT_K_PRIME.max(k), budget: Budget::Infinite, threads: 1 }
    }

    pub fn with_k_prime(mut self, k_prime: usize) -> Self {
        self.k_prime = k_prime;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if self.k_prime < self.k {
            return Err(Error::InvalidParams(format!("k' ({}) must be at least k ({})", self.k_prime, self.k)));
        }
        if self.threads == 0 {
            return Err(Error::InvalidParams("threads must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidParams("k must be at least 1".into()))
    } else {
        Ok(())
    }
}

pub(crate) fn check_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        Err(Error::InvalidParams("threads must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Maps `(slot, score)` pairs to a ranked result.
pub(crate) fn to_result(ids: &IdMap, slots: &[(u32, f64)]) -> TopKResult {
    TopKResult::new(
        slots
            .iter()
            .filter_map(|&(slot, score)| ids.ext_of(slot).map(|ext_id| Hit { ext_id, score }))
            .collect(),
    )
}

/// Second stage shared by both anytime paths: fetch every candidate's raw
/// vector, score it exactly and keep the best `k`.
pub(crate) fn rerank(
    q: &SparseVector,
    mut candidates: Vec<(u32, f64)>,
    k: usize,
    ids: &IdMap,
    store: &VectorStore,
) -> Result<TopKResult> {
    // slot order keeps the boundary tie rule of find_largest
    candidates.sort_unstable_by_key(|c| c.0);
    let mut exact = Vec::with_capacity(candidates.len());
    for (slot, _) in candidates {
        let ext = ids.ext_of(slot).ok_or_else(|| Error::InvalidParams(format!("slot {slot} is not live")))?;
        exact.push((slot, inner_product(q, store.fetch(ext)?)));
    }
    Ok(to_result(ids, &find_largest_iter(exact, k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(QueryParams::new(10).validate().is_ok());
        assert_eq!(QueryParams::new(10).k_prime, 5000);
        assert_eq!(QueryParams::new(9000).k_prime, 9000);
        assert!(QueryParams::new(0).validate().is_err());
        assert!(QueryParams::new(10).with_k_prime(5).validate().is_err());
        assert!(QueryParams::new(10).with_threads(0).validate().is_err());
    }
}
