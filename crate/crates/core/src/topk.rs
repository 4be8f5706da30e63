//! Bounded-heap top-k selection.
//!
//! [`find_largest`] scans scores in slot order and keeps a min-heap of at most
//! `k` entries guarded by a threshold `θ` that starts at `-∞`. A slot enters
//! only when its score is strictly greater than `θ`; whenever the heap grows
//! past `k` the worst entry is popped and its score becomes the new `θ`.
//!
//! The heap orders entries by score and, among equal scores, treats the later
//! slot as worse. Combined with the strict comparison this makes the result
//! exactly the first `k` slots under the total order "score descending, slot
//! ascending", which is also what a full sort produces. Slots scored `-∞` are
//! never admitted; engines use that to mask dead slots.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy)]
struct Entry {
    slot: u32,
    score: f64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // "Greater" means worse, so the max-heap pops the worst entry.
    fn cmp(&self, other: &Self) -> Ordering {
        other.score.total_cmp(&self.score).then(self.slot.cmp(&other.slot))
    }
}

/// Returns up to `k` `(slot, score)` pairs with the largest scores, sorted by
/// descending score and then ascending slot.
pub fn find_largest(scores: &[f64], k: usize) -> Vec<(u32, f64)> {
    find_largest_iter(scores.iter().enumerate().map(|(i, &s)| (i as u32, s)), k)
}

/// [`find_largest`] over an arbitrary `(slot, score)` stream. The stream must
/// be in ascending slot order for the boundary tie rule to hold.
pub fn find_largest_iter(items: impl IntoIterator<Item = (u32, f64)>, k: usize) -> Vec<(u32, f64)> {
    if k == 0 {
        return Vec::new();
    }
    let mut heap = BinaryHeap::with_capacity(k + 1);
    let mut theta = f64::NEG_INFINITY;
    for (slot, score) in items {
        if score > theta {
            heap.push(Entry { slot, score });
            if heap.len() > k {
                theta = heap.pop().map(|e| e.score).unwrap_or(theta);
            }
        }
    }
    // ascending under the "worse is greater" order is best-first
    heap.into_sorted_vec().into_iter().map(|e| (e.slot, e.score)).collect()
}

/// Merges per-range selections (each already top-k of a disjoint slot range)
/// into the global top-k.
pub fn merge_largest(parts: Vec<Vec<(u32, f64)>>, k: usize) -> Vec<(u32, f64)> {
    let mut all: Vec<(u32, f64)> = parts.into_iter().flatten().collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// One retrieved document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub ext_id: u64,
    pub score: f64,
}

/// Ranked result list: scores non-increasing, equal scores by ascending
/// external id, ids unique.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TopKResult {
    pub hits: Vec<Hit>,
}

impl TopKResult {
    pub fn new(mut hits: Vec<Hit>) -> Self {
        hits.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.ext_id.cmp(&b.ext_id)));
        Self { hits }
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn ids(&self) -> Vec<u64> {
        self.hits.iter().map(|h| h.ext_id).collect()
    }

    /// External ids as a sorted set, convenient for hit-set comparisons.
    pub fn id_set(&self) -> Vec<u64> {
        let mut ids = self.ids();
        ids.sort_unstable();
        ids
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn slots(v: &[(u32, f64)]) -> Vec<u32> {
        let mut s: Vec<u32> = v.iter().map(|x| x.0).collect();
        s.sort_unstable();
        s
    }

    fn full_sort_oracle(scores: &[f64], k: usize) -> Vec<u32> {
        let mut idx: Vec<u32> = (0..scores.len() as u32).filter(|&i| scores[i as usize] > f64::NEG_INFINITY).collect();
        idx.sort_by(|&a, &b| scores[b as usize].total_cmp(&scores[a as usize]).then(a.cmp(&b)));
        idx.truncate(k);
        idx.sort_unstable();
        idx
    }

    #[test]
    fn small_examples() {
        assert_eq!(slots(&find_largest(&[0.5, 2.0, 1.0], 2)), vec![1, 2]);
        assert_eq!(slots(&find_largest(&[0.0; 5], 2)), vec![0, 1]);
        assert!(find_largest(&[], 3).is_empty());
        assert_eq!(find_largest(&[1.0, 3.0], 5), vec![(1, 3.0), (0, 1.0)]);
    }

    #[test]
    fn masked_slots_never_admitted() {
        let scores = [f64::NEG_INFINITY, 1.0, f64::NEG_INFINITY, 0.0];
        assert_eq!(slots(&find_largest(&scores, 10)), vec![1, 3]);
    }

    #[test]
    fn uniform_scores_match_full_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scores: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        assert_eq!(slots(&find_largest(&scores, 10)), full_sort_oracle(&scores, 10));
    }

    #[test]
    fn merge_of_ranges_equals_global() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let scores: Vec<f64> = (0..997).map(|_| rng.random_range(0..20) as f64).collect();
        let parts = scores
            .chunks(100)
            .enumerate()
            .map(|(c, chunk)| {
                find_largest_iter(chunk.iter().enumerate().map(|(i, &s)| ((c * 100 + i) as u32, s)), 25)
            })
            .collect();
        assert_eq!(merge_largest(parts, 25), find_largest(&scores, 25));
    }

    proptest! {
        // small integer scores force plenty of boundary ties
        #[test]
        fn agrees_with_full_sort(scores in prop::collection::vec(0i32..6, 0..300), k in 1usize..40) {
            let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
            let got = find_largest(&scores, k);
            prop_assert_eq!(slots(&got), full_sort_oracle(&scores, k));
            for w in got.windows(2) {
                prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
            }
        }
    }
}
