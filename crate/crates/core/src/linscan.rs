//! LinScan: exact coordinate-at-a-time retrieval over non-interleaved
//! posting lists.
//!
//! Scores accumulate into a dense `f64` array indexed by internal slot, one
//! pass per active query coordinate. The anytime variant visits coordinates
//! by decreasing `|q[j]|`, stops between lists once the budget runs out and
//! re-ranks the best `k′` partial scores exactly against raw vectors.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::budget::{Budget, Deadline};
use crate::error::{Error, Result};
use crate::idmap::IdMap;
pub use crate::idsets::PostingVariant;
use crate::idsets::PostingList;
use crate::query::{check_k, check_threads, rerank, to_result, QueryParams};
use crate::scan::{scan_lists, segment, select_top};
use crate::storage::VectorStore;
use crate::topk::{find_largest, TopKResult};
use crate::vector::SparseVector;
use crate::OpCounters;

#[derive(Debug, Clone)]
pub struct LinScanIndex {
    n: u32,
    variant: PostingVariant,
    lists: HashMap<u32, PostingList>,
    ids: IdMap,
    counters: OpCounters,
}

impl LinScanIndex {
    /// An empty index over `n` dimensions.
    pub fn new(n: u32, variant: PostingVariant) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        Ok(Self { n, variant, lists: HashMap::new(), ids: IdMap::new(), counters: OpCounters::default() })
    }

    pub fn dims(&self) -> u32 {
        self.n
    }

    pub fn variant(&self) -> PostingVariant {
        self.variant
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

    /// Number of postings in the list of `coord`.
    pub fn list_len(&self, coord: u32) -> usize {
        self.lists.get(&coord).map_or(0, PostingList::len)
    }

    pub fn list(&self, coord: u32) -> Option<&PostingList> {
        self.lists.get(&coord)
    }

    pub fn posting_count(&self) -> usize {
        self.lists.values().map(PostingList::len).sum()
    }

    pub fn insert(&mut self, vector: &SparseVector) -> Result<()> {
        vector.check_dims(self.n)?;
        let slot = self.ids.assign(vector.ext_id())?;
        self.place(slot, vector)
    }

    /// Inserts `vector` at a specific free slot; used when loading a saved
    /// index whose slot table was restored first.
    pub(crate) fn insert_at(&mut self, slot: u32, vector: &SparseVector) -> Result<()> {
        vector.check_dims(self.n)?;
        self.place(slot, vector)
    }

    pub(crate) fn restore_ids(&mut self, ids: IdMap) {
        self.ids = ids;
    }

    fn place(&mut self, slot: u32, vector: &SparseVector) -> Result<()> {
        for (coord, value) in vector.iter() {
            self.lists.entry(coord).or_insert_with(|| PostingList::new(self.variant)).insert(slot, value)?;
            self.counters.posting_inserts += 1;
        }
        Ok(())
    }

    /// Full deletion: wipes every posting of the vector, then frees its slot.
    /// The vector's active coordinates are read from `store`.
    pub fn delete(&mut self, ext_id: u64, store: &VectorStore) -> Result<()> {
        let slot = self.ids.slot_of(ext_id).ok_or(Error::UnknownId(ext_id))?;
        let vector = store.fetch(ext_id)?;
        for &coord in vector.coords() {
            if let Some(list) = self.lists.get_mut(&coord) {
                if list.remove(slot) {
                    self.counters.posting_removals += 1;
                }
                if list.is_empty() {
                    self.lists.remove(&coord);
                }
            }
        }
        self.ids.release(ext_id)?;
        Ok(())
    }

    /// Exact top-`k` over live vectors.
    pub fn retrieve(&self, q: &SparseVector, k: usize) -> Result<TopKResult> {
        self.retrieve_parallel(q, k, 1)
    }

    /// Exact top-`k` with each list split into `threads` contiguous segments.
    /// The hit set does not depend on `threads`.
    pub fn retrieve_parallel(&self, q: &SparseVector, k: usize, threads: usize) -> Result<TopKResult> {
        check_k(k)?;
        check_threads(threads)?;
        q.check_dims(self.n)?;
        let order: Vec<(u32, f32)> = q.iter().collect();
        let (scores, _) = self.accumulate(&order, Budget::Infinite.start(), threads);
        Ok(to_result(&self.ids, &select_top(&scores, k, threads)))
    }

    /// Partial scores after processing coordinates in decreasing `|q[j]|`
    /// until the budget is exhausted. Returns the scores (indexed by slot,
    /// `-∞` on free slots) and the number of coordinates processed.
    pub fn partial_scores(&self, q: &SparseVector, budget: Budget, threads: usize) -> Result<(Vec<f64>, usize)> {
        check_threads(threads)?;
        q.check_dims(self.n)?;
        Ok(self.accumulate(&q.coords_by_magnitude(), budget.start(), threads))
    }

    /// Anytime retrieval: budgeted partial scoring, then exact re-ranking of
    /// the best `k′` candidates fetched from `store`.
    pub fn retrieve_anytime(&self, q: &SparseVector, params: &QueryParams, store: &VectorStore) -> Result<TopKResult> {
        params.validate()?;
        let (scores, _) = self.partial_scores(q, params.budget, params.threads)?;
        let candidates = if params.threads > 1 {
            select_top(&scores, params.k_prime, params.threads)
        } else {
            find_largest(&scores, params.k_prime)
        };
        rerank(q, candidates, params.k, &self.ids, store)
    }

    fn accumulate(&self, order: &[(u32, f32)], deadline: Deadline, threads: usize) -> (Vec<f64>, usize) {
        let mut scores = self.ids.score_template();
        let lists: Vec<(&PostingList, f64)> =
            order.iter().map(|&(c, v)| (self.lists.get(&c), f64::from(v))).filter_map(|(l, v)| l.map(|l| (l, v))).collect();
        if lists.is_empty() {
            return (scores, 0);
        }
        if threads == 1 {
            let processed = scan_lists(vec![&mut scores], lists.len(), deadline, false, |scores, i| {
                let (list, qj) = lists[i];
                list.for_each(|slot, v| scores[slot as usize] += qj * f64::from(v));
            });
            return (scores, processed);
        }
        // A slot occurs at most once per list, so the workers of one list
        // write disjoint cells. Lockstep keeps each slot's additions in list
        // order, making the sums bit-identical to the sequential pass.
        let cells: Vec<AtomicU64> = scores.iter().map(|s| AtomicU64::new(s.to_bits())).collect();
        let processed = scan_lists((0..threads).collect(), lists.len(), deadline, true, |&mut part, i| {
            let (list, qj) = lists[i];
            let (start, end) = segment(list.len(), threads, part);
            list.for_each_in(start, end, |slot, v| {
                let cell = &cells[slot as usize];
                let cur = f64::from_bits(cell.load(Ordering::Relaxed));
                cell.store((cur + qj * f64::from(v)).to_bits(), Ordering::Relaxed);
            });
        });
        for (s, c) in scores.iter_mut().zip(cells) {
            *s = f64::from_bits(c.into_inner());
        }
        (scores, processed)
    }

    /// Checks the index against `store`: every live vector has exactly its
    /// active coordinates' postings with matching values, and no list holds
    /// a free slot.
    pub fn audit(&self, store: &VectorStore) -> std::result::Result<(), String> {
        let mut expected = 0usize;
        for (slot, ext) in self.ids.live() {
            let v = store.fetch(ext).map_err(|e| e.to_string())?;
            for (coord, value) in v.iter() {
                let stored = self.lists.get(&coord).and_then(|l| l.get(slot));
                let want = match self.variant {
                    PostingVariant::Raw => value,
                    PostingVariant::Compressed => crate::precision::to_bf16_nearest(value).to_f32(),
                };
                if stored != Some(want) {
                    return Err(format!("slot {slot} coord {coord}: stored {stored:?}, expected {want}"));
                }
            }
            expected += v.nnz();
        }
        for (coord, list) in &self.lists {
            list.audit().map_err(|e| format!("list {coord}: {e}"))?;
        }
        if self.posting_count() != expected {
            return Err(format!("{} postings for {expected} live entries", self.posting_count()));
        }
        Ok(())
    }
}
