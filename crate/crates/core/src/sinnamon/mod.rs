//! Sinnamon: an id-only inverted index plus a fixed-width sketch per
//! document.
//!
//! Each document column of the sketch holds, for every row `k`, the largest
//! and smallest of the document's values whose coordinate maps to `k` under
//! at least one of the `h` mappings. Scoring decodes a document value as the
//! least upper bound (positive query entry) or greatest lower bound (negative
//! query entry), so with an unlimited budget every score is an upper bound on
//! the exact inner product. The best `k′` scores are then re-ranked exactly
//! from raw storage.
//!
//! Deleting a document only removes its slot from the inverted lists; the
//! sketch column stays as it is until the slot is handed out again, at which
//! point the column is cleared and rewritten.

mod mappings;
mod sketch;

use std::collections::HashMap;

use half::bf16;

pub use mappings::HashMappings;
pub use sketch::SketchMatrix;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::idmap::IdMap;
use crate::idsets::CompressedIdSet;
use crate::query::{check_threads, rerank, QueryParams};
use crate::scan::{scan_lists, segment, select_top};
use crate::storage::VectorStore;
use crate::topk::{find_largest, TopKResult};
use crate::vector::SparseVector;
use crate::OpCounters;

/// Sketch geometry and variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SinnamonConfig {
    /// Dimensionality.
    pub n: u32,
    /// Rows per sketch half; the full sketch has `2m` rows, or `m` when
    /// `nonneg` is set.
    pub m: u32,
    /// Number of random mappings.
    pub h: u32,
    pub seed: u64,
    /// Sinnamon⁺: non-negative data only, upper-bound half only.
    pub nonneg: bool,
}

impl SinnamonConfig {
    pub fn new(n: u32, m: u32, h: u32) -> Self {
        Self { n, m, h, seed: 0, nonneg: false }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn nonneg(mut self, nonneg: bool) -> Self {
        self.nonneg = nonneg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.h == 0 {
            return Err(Error::InvalidConfig(format!(
                "n, m and h must be at least 1 (n={}, m={}, h={})",
                self.n, self.m, self.h
            )));
        }
        Ok(())
    }
}

/// Which sketch half a decode reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Debug, Clone)]
pub struct SinnamonIndex {
    config: SinnamonConfig,
    maps: HashMappings,
    inv: HashMap<u32, CompressedIdSet>,
    sketch: SketchMatrix,
    ids: IdMap,
    counters: OpCounters,
}

/// One query coordinate ready for scoring.
struct Term<'a> {
    set: &'a CompressedIdSet,
    q: f64,
    rows: Vec<&'a [bf16]>,
    upper: bool,
}

impl Term<'_> {
    #[inline]
    fn decode(&self, slot: u32) -> f32 {
        let s = slot as usize;
        let first = self.rows[0][s].to_f32();
        if self.upper {
            self.rows[1..].iter().fold(first, |acc, r| acc.min(r[s].to_f32()))
        } else {
            self.rows[1..].iter().fold(first, |acc, r| acc.max(r[s].to_f32()))
        }
    }
}

impl SinnamonIndex {
    pub fn new(config: SinnamonConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            maps: HashMappings::new(config.h, config.m, config.seed),
            inv: HashMap::new(),
            sketch: SketchMatrix::new(config.m as usize, config.nonneg),
            ids: IdMap::new(),
            counters: OpCounters::default(),
        })
    }

    pub fn config(&self) -> SinnamonConfig {
        self.config
    }

    pub fn mappings(&self) -> &HashMappings {
        &self.maps
    }

    pub fn sketch(&self) -> &SketchMatrix {
        &self.sketch
    }

    pub fn len(&self) -> usize {
        self.ids.live_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id_map(&self) -> &IdMap {
        &self.ids
    }

    pub fn counters(&self) -> OpCounters {
        self.counters
    }

    /// Inverted list of `coord`, if non-empty.
    pub fn list(&self, coord: u32) -> Option<&CompressedIdSet> {
        self.inv.get(&coord)
    }

    /// Approximate memory of the inverted index plus the sketch, in bytes.
    pub fn index_bytes(&self) -> usize {
        self.inv.values().map(CompressedIdSet::compressed_bytes).sum::<usize>() + self.sketch.bytes()
    }

    fn check(&self, vector: &SparseVector) -> Result<()> {
        vector.check_dims(self.config.n)?;
        if self.config.nonneg {
            if let Some((coord, _)) = vector.iter().find(|&(_, v)| v < 0.0) {
                return Err(Error::NegativeValue { ext_id: vector.ext_id(), coord });
            }
        }
        Ok(())
    }

    pub fn insert(&mut self, vector: &SparseVector) -> Result<()> {
        self.check(vector)?;
        let slot = self.ids.assign(vector.ext_id())?;
        self.place(slot, vector);
        Ok(())
    }

    pub(crate) fn insert_at(&mut self, slot: u32, vector: &SparseVector) -> Result<()> {
        self.check(vector)?;
        self.place(slot, vector);
        Ok(())
    }

    pub(crate) fn restore_ids(&mut self, ids: IdMap) {
        if ids.slot_count() > 0 {
            self.sketch.ensure_column(ids.slot_count() as u32 - 1);
        }
        self.ids = ids;
    }

    fn place(&mut self, slot: u32, vector: &SparseVector) {
        let m = self.config.m as usize;
        self.sketch.ensure_column(slot);
        // a recycled column may hold a stale sketch
        self.counters.sketch_writes += self.sketch.clear_column(slot);
        let mut upper = vec![f32::NEG_INFINITY; m];
        let mut lower = vec![f32::INFINITY; m];
        for (coord, value) in vector.iter() {
            self.inv.entry(coord).or_default().insert(slot);
            self.counters.idset_inserts += 1;
            for o in 0..self.config.h {
                let r = self.maps.map(o, coord) as usize;
                upper[r] = upper[r].max(value);
                lower[r] = lower[r].min(value);
            }
        }
        for r in 0..m {
            if upper[r] > f32::NEG_INFINITY {
                self.sketch.set_upper(r, slot, upper[r]);
                self.counters.sketch_writes += 1;
                if self.sketch.has_lower() {
                    self.sketch.set_lower(r, slot, lower[r]);
                    self.counters.sketch_writes += 1;
                }
            }
        }
    }

    /// Removes the vector's slot from its inverted lists and frees the slot.
    /// The sketch column is left untouched.
    pub fn delete(&mut self, ext_id: u64, store: &VectorStore) -> Result<()> {
        let slot = self.ids.slot_of(ext_id).ok_or(Error::UnknownId(ext_id))?;
        let vector = store.fetch(ext_id)?;
        for &coord in vector.coords() {
            if let Some(set) = self.inv.get_mut(&coord) {
                if set.remove(slot) {
                    self.counters.idset_removals += 1;
                }
                if set.is_empty() {
                    self.inv.remove(&coord);
                }
            }
        }
        self.ids.release(ext_id)?;
        Ok(())
    }

    /// Decoded value of coordinate `j` for `slot`: the least of the mapped
    /// upper bounds, or the greatest of the mapped lower bounds. Without a
    /// lower half the lower bound is `0`.
    pub fn decode(&self, slot: u32, j: u32, bound: Bound) -> f32 {
        let rows = self.maps.rows(j).into_iter().map(|r| r as usize);
        match bound {
            Bound::Upper => rows.map(|r| self.sketch.upper(r, slot)).fold(f32::INFINITY, f32::min),
            Bound::Lower if !self.sketch.has_lower() => 0.0,
            Bound::Lower => rows.map(|r| self.sketch.lower(r, slot)).fold(f32::NEG_INFINITY, f32::max),
        }
    }

    fn terms<'a>(&'a self, q: &SparseVector) -> Vec<Term<'a>> {
        q.coords_by_magnitude()
            .into_iter()
            .filter_map(|(coord, qv)| {
                let set = self.inv.get(&coord)?;
                let upper = qv > 0.0;
                if !upper && !self.sketch.has_lower() {
                    // the lower bound is 0, so the contribution is 0
                    return None;
                }
                let rows = self
                    .maps
                    .rows(coord)
                    .into_iter()
                    .map(|r| if upper { self.sketch.upper_row(r as usize) } else { self.sketch.lower_row(r as usize) })
                    .collect();
                Some(Term { set, q: f64::from(qv), rows, upper })
            })
            .collect()
    }

    /// Upper-bound scores indexed by slot (`-∞` on free slots), computed in
    /// decreasing `|q[j]|` until `budget` runs out, plus the number of
    /// inverted lists processed.
    pub fn score(&self, q: &SparseVector, budget: Budget, threads: usize) -> Result<(Vec<f64>, usize)> {
        check_threads(threads)?;
        q.check_dims(self.config.n)?;
        let mut scores = self.ids.score_template();
        let terms = self.terms(q);
        if terms.is_empty() {
            return Ok((scores, 0));
        }
        let deadline = budget.start();
        let workers = threads.min(scores.len()).max(1);
        let mut chunks = Vec::with_capacity(workers);
        let mut rest = scores.as_mut_slice();
        let mut lo = 0u32;
        for p in 0..workers {
            let (a, b) = segment(self.ids.slot_count(), workers, p);
            let (head, tail) = rest.split_at_mut(b - a);
            chunks.push((lo, head));
            lo += (b - a) as u32;
            rest = tail;
        }
        // Workers own disjoint slot ranges, so no cross-worker ordering is
        // needed: each slot still receives its terms in list order.
        let processed = scan_lists(chunks, terms.len(), deadline, false, |(lo, chunk), i| {
            let term = &terms[i];
            let hi = *lo + chunk.len() as u32;
            let add = |slot: u32, chunk: &mut [f64]| {
                chunk[(slot - *lo) as usize] += term.q * f64::from(term.decode(slot));
            };
            if workers == 1 {
                term.set.iter().for_each(|slot| add(slot, chunk));
            } else {
                term.set.range(*lo..hi).for_each(|slot| add(slot, chunk));
            }
        });
        Ok((scores, processed))
    }

    /// Second stage: best `k′` by sketch score, re-scored exactly from
    /// `store`, best `k` kept.
    pub fn rank(&self, q: &SparseVector, scores: &[f64], params: &QueryParams, store: &VectorStore) -> Result<TopKResult> {
        params.validate()?;
        let candidates = if params.threads > 1 {
            select_top(scores, params.k_prime, params.threads)
        } else {
            find_largest(scores, params.k_prime)
        };
        rerank(q, candidates, params.k, &self.ids, store)
    }

    pub fn retrieve(&self, q: &SparseVector, params: &QueryParams, store: &VectorStore) -> Result<TopKResult> {
        params.validate()?;
        let (scores, _) = self.score(q, params.budget, params.threads)?;
        self.rank(q, &scores, params, store)
    }

    /// Checks the inverted index and the decode sandwich
    /// `lower ≤ x[j] ≤ upper` for every live vector in `store`.
    pub fn audit(&self, store: &VectorStore) -> std::result::Result<(), String> {
        let mut entries = 0usize;
        for (slot, ext) in self.ids.live() {
            let v = store.fetch(ext).map_err(|e| e.to_string())?;
            for (j, x) in v.iter() {
                if !self.inv.get(&j).is_some_and(|s| s.contains(slot)) {
                    return Err(format!("slot {slot} missing from list {j}"));
                }
                let (up, lo) = (self.decode(slot, j, Bound::Upper), self.decode(slot, j, Bound::Lower));
                if !(lo <= x && x <= up) {
                    return Err(format!("slot {slot} coord {j}: {lo} <= {x} <= {up} violated"));
                }
            }
            entries += v.nnz();
        }
        let listed: usize = self.inv.values().map(CompressedIdSet::len).sum();
        if listed != entries {
            return Err(format!("{listed} list entries for {entries} live entries"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::inner_product;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gaussian_vector(rng: &mut ChaCha8Rng, ext_id: u64, n: u32, nnz: usize) -> SparseVector {
        use rand_distr::{Distribution, Normal};
        let normal = Normal::new(0.0f32, 1.0).unwrap();
        let mut pairs = std::collections::BTreeMap::new();
        while pairs.len() < nnz {
            let v = normal.sample(rng);
            if v != 0.0 {
                pairs.insert(rng.random_range(0..n), v);
            }
        }
        SparseVector::from_pairs(ext_id, pairs).unwrap()
    }

    fn build(config: SinnamonConfig, docs: &[SparseVector]) -> (SinnamonIndex, VectorStore) {
        let mut idx = SinnamonIndex::new(config).unwrap();
        let mut store = VectorStore::new();
        for d in docs {
            idx.insert(d).unwrap();
            store.put(d.clone()).unwrap();
        }
        (idx, store)
    }

    /// A seed under which the given coordinates land in distinct rows (h=1).
    fn seed_without_collisions(coords: &[u32], m: u32) -> u64 {
        (0..).find(|&s| {
            let maps = HashMappings::new(1, m, s);
            let mut rows: Vec<u32> = coords.iter().map(|&c| maps.map(0, c)).collect();
            rows.sort_unstable();
            rows.dedup();
            rows.len() == coords.len()
        })
        .unwrap()
    }

    #[test]
    fn distinct_rows_hold_exact_values() {
        let coords = [10, 27, 113];
        let seed = seed_without_collisions(&coords, 8);
        let x = SparseVector::from_pairs(12, [(10, 0.5), (27, -1.25), (113, 3.0)]).unwrap();
        let (idx, _) = build(SinnamonConfig::new(200, 8, 1).with_seed(seed), std::slice::from_ref(&x));
        for (j, v) in x.iter() {
            let r = idx.mappings().map(0, j) as usize;
            assert_eq!((idx.sketch().upper(r, 0), idx.sketch().lower(r, 0)), (v, v));
            assert_eq!(idx.decode(0, j, Bound::Upper), v);
        }
    }

    #[test]
    fn collisions_keep_max_and_min() {
        let maps_for = |s| HashMappings::new(1, 4, s);
        let seed = (0..).find(|&s| maps_for(s).map(0, 1) == maps_for(s).map(0, 2)).unwrap();
        let x = SparseVector::from_pairs(1, [(1, 0.5), (2, 2.0)]).unwrap();
        let (idx, _) = build(SinnamonConfig::new(10, 4, 1).with_seed(seed), &[x]);
        let r = idx.mappings().map(0, 1) as usize;
        assert_eq!((idx.sketch().upper(r, 0), idx.sketch().lower(r, 0)), (2.0, 0.5));
        assert_eq!(idx.decode(0, 1, Bound::Upper), 2.0);
        assert_eq!(idx.decode(0, 2, Bound::Lower), 0.5);
    }

    #[test]
    fn maximum_value_decodes_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let docs: Vec<_> = (0..10_000).map(|i| gaussian_vector(&mut rng, i, 5000, 40)).collect();
        let (idx, _) = build(SinnamonConfig::new(5000, 20, 1).with_seed(3), &docs);
        for (slot, d) in docs.iter().enumerate() {
            let (j, x) = d.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
            assert_eq!(idx.decode(slot as u32, j, Bound::Upper), crate::precision::to_bf16_up(x).to_f32());
        }
    }

    #[test]
    fn scores_upper_bound_exact_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let docs: Vec<_> = (0..2000).map(|i| gaussian_vector(&mut rng, i, 1000, 30)).collect();
        for h in [1, 2, 3] {
            let (idx, store) = build(SinnamonConfig::new(1000, 12, h).with_seed(h as u64), &docs);
            idx.audit(&store).unwrap();
            for qid in 0..20 {
                let q = gaussian_vector(&mut rng, qid, 1000, 20);
                let (scores, _) = idx.score(&q, Budget::Infinite, 1).unwrap();
                for d in &docs {
                    let slot = idx.id_map().slot_of(d.ext_id()).unwrap() as usize;
                    // the gap is exactly the sum of q[j]·(decoded − true)
                    let gap: f64 = q
                        .iter()
                        .filter_map(|(j, qj)| d.get(j).map(|x| (j, qj, x)))
                        .map(|(j, qj, x)| {
                            let b = if qj > 0.0 { Bound::Upper } else { Bound::Lower };
                            f64::from(qj) * (f64::from(idx.decode(slot as u32, j, b)) - f64::from(x))
                        })
                        .sum();
                    let exact = inner_product(&q, d);
                    assert!(scores[slot] >= exact, "score {} < exact {exact}", scores[slot]);
                    assert!((scores[slot] - exact - gap).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn threads_do_not_change_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let docs: Vec<_> = (0..3000).map(|i| gaussian_vector(&mut rng, i, 800, 25)).collect();
        let (idx, store) = build(SinnamonConfig::new(800, 10, 2), &docs);
        for qid in 0..5 {
            let q = gaussian_vector(&mut rng, qid, 800, 15);
            let (a, _) = idx.score(&q, Budget::Infinite, 1).unwrap();
            for t in [2, 7] {
                assert_eq!(idx.score(&q, Budget::Infinite, t).unwrap().0, a);
                let p = QueryParams::new(10).with_k_prime(200);
                assert_eq!(idx.retrieve(&q, &p.with_threads(t), &store).unwrap(), idx.retrieve(&q, &p, &store).unwrap());
            }
        }
    }

    #[test]
    fn delete_leaves_sketch_and_recycles_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let docs: Vec<_> = (0..50).map(|i| gaussian_vector(&mut rng, i, 300, 10)).collect();
        let (mut idx, mut store) = build(SinnamonConfig::new(300, 6, 2), &docs);
        let before = idx.counters();
        idx.delete(7, &store).unwrap();
        let after = idx.counters();
        assert_eq!(after.sketch_writes, before.sketch_writes);
        assert_eq!(after.idset_removals - before.idset_removals, 10);
        store.remove(7).unwrap();
        assert!(matches!(idx.delete(7, &store), Err(Error::UnknownId(7))));

        let q = docs[7].clone();
        let hits = idx.retrieve(&q, &QueryParams::new(50), &store).unwrap();
        assert!(!hits.ids().contains(&7));

        let fresh = gaussian_vector(&mut rng, 1000, 300, 10);
        idx.insert(&fresh).unwrap();
        store.put(fresh).unwrap();
        assert_eq!(idx.id_map().slot_of(1000), Some(7));
        idx.audit(&store).unwrap();
    }

    #[test]
    fn nonneg_matches_full_sketch() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let abs = |v: SparseVector| {
            SparseVector::new(v.ext_id(), v.coords().to_vec(), v.values().iter().map(|x| x.abs()).collect()).unwrap()
        };
        let docs: Vec<_> = (0..1000).map(|i| abs(gaussian_vector(&mut rng, i, 400, 20))).collect();
        let (full, _) = build(SinnamonConfig::new(400, 8, 2), &docs);
        let (plus, store) = build(SinnamonConfig::new(400, 8, 2).nonneg(true), &docs);
        assert_eq!(plus.sketch().row_count(), 8);
        plus.audit(&store).unwrap();
        for qid in 0..10 {
            let q = abs(gaussian_vector(&mut rng, qid, 400, 10));
            assert_eq!(full.score(&q, Budget::Infinite, 1).unwrap(), plus.score(&q, Budget::Infinite, 1).unwrap());
        }
        let mut p = plus.clone();
        let neg = SparseVector::from_pairs(5000, [(1, -1.0)]).unwrap();
        assert!(matches!(p.insert(&neg), Err(Error::NegativeValue { coord: 1, .. })));
    }

    #[test]
    fn rerank_everything_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let docs: Vec<_> = (0..800).map(|i| gaussian_vector(&mut rng, i, 300, 12)).collect();
        let (idx, store) = build(SinnamonConfig::new(300, 4, 1), &docs);
        for qid in 0..10 {
            let q = gaussian_vector(&mut rng, qid, 300, 8);
            let got = idx.retrieve(&q, &QueryParams::new(10).with_k_prime(800), &store).unwrap();
            let mut exact: Vec<(u64, f64)> = docs.iter().map(|d| (d.ext_id(), inner_product(&q, d))).collect();
            exact.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            assert_eq!(got.ids(), exact.iter().take(10).map(|e| e.0).collect::<Vec<_>>());
        }
    }

    #[test]
    fn degenerate_cases() {
        let idx = SinnamonIndex::new(SinnamonConfig::new(10, 2, 1)).unwrap();
        let q = SparseVector::from_pairs(0, [(1, 1.0)]).unwrap();
        assert!(idx.retrieve(&q, &QueryParams::new(5), &VectorStore::new()).unwrap().is_empty());
        assert!(SinnamonIndex::new(SinnamonConfig::new(10, 0, 1)).is_err());
        assert!(SinnamonIndex::new(SinnamonConfig::new(10, 2, 0)).is_err());
    }
}
