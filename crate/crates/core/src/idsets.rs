//! Dynamic id sets and posting lists behind both inverted indexes.

use std::ops::Range;

use half::bf16;
use roaring::RoaringBitmap;

use crate::error::{Error, Result};
use crate::precision::to_bf16_nearest;

/// Compressed dynamic set of `u32` ids, backed by a roaring bitmap.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompressedIdSet {
    bits: RoaringBitmap,
}

impl CompressedIdSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` if the id was newly inserted.
    #[inline]
    pub fn insert(&mut self, id: u32) -> bool {
        self.bits.insert(id)
    }

    /// Returns `false` when the id was absent.
    #[inline]
    pub fn remove(&mut self, id: u32) -> bool {
        self.bits.remove(id)
    }

    #[inline]
    pub fn contains(&self, id: u32) -> bool {
        self.bits.contains(id)
    }

    /// Number of stored ids strictly below `id`.
    #[inline]
    pub fn rank(&self, id: u32) -> usize {
        if id == 0 {
            0
        } else {
            self.bits.rank(id - 1) as usize
        }
    }

    /// The `n`-th smallest id.
    #[inline]
    pub fn select(&self, n: usize) -> Option<u32> {
        u32::try_from(n).ok().and_then(|n| self.bits.select(n))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Ascending iteration.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.iter()
    }

    /// Ascending iteration restricted to `range`.
    pub fn range(&self, range: Range<u32>) -> impl Iterator<Item = u32> + '_ {
        self.bits.range(range)
    }

    /// Serialized size in bytes, a proxy for memory footprint.
    pub fn compressed_bytes(&self) -> usize {
        self.bits.serialized_size()
    }
}

/// Value precision of a posting list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostingVariant {
    /// Ids in insertion order as plain `u32`, values as `f32`.
    Raw,
    /// Ids in a compressed set, values as bfloat16 aligned by rank.
    Compressed,
}

/// A non-interleaved posting list: ids and values kept in two parallel
/// sequences.
#[derive(Debug, Clone)]
pub enum PostingList {
    Raw { ids: Vec<u32>, vals: Vec<f32> },
    Compressed { ids: CompressedIdSet, vals: Vec<bf16> },
}

impl PostingList {
    pub fn new(variant: PostingVariant) -> Self {
        match variant {
            PostingVariant::Raw => PostingList::Raw { ids: Vec::new(), vals: Vec::new() },
            PostingVariant::Compressed => {
                PostingList::Compressed { ids: CompressedIdSet::new(), vals: Vec::new() }
            }
        }
    }

    pub fn variant(&self) -> PostingVariant {
        match self {
            PostingList::Raw { .. } => PostingVariant::Raw,
            PostingList::Compressed { .. } => PostingVariant::Compressed,
        }
    }

    /// Adds `(slot, value)`. The raw variant appends without a membership
    /// scan; slot uniqueness there is guaranteed by the owning index's
    /// [`crate::IdMap`]. The compressed variant rejects duplicates.
    pub fn insert(&mut self, slot: u32, value: f32) -> Result<()> {
        match self {
            PostingList::Raw { ids, vals } => {
                ids.push(slot);
                vals.push(value);
            }
            PostingList::Compressed { ids, vals } => {
                if !ids.insert(slot) {
                    return Err(Error::InvalidParams(format!("slot {slot} already in posting list")));
                }
                let at = ids.rank(slot);
                vals.insert(at, to_bf16_nearest(value));
            }
        }
        Ok(())
    }

    /// Removes the posting for `slot`; returns whether it was present.
    pub fn remove(&mut self, slot: u32) -> bool {
        match self {
            PostingList::Raw { ids, vals } => match ids.iter().position(|&i| i == slot) {
                Some(at) => {
                    ids.swap_remove(at);
                    vals.swap_remove(at);
                    true
                }
                None => false,
            },
            PostingList::Compressed { ids, vals } => {
                if !ids.remove(slot) {
                    return false;
                }
                vals.remove(ids.rank(slot));
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PostingList::Raw { ids, .. } => ids.len(),
            PostingList::Compressed { ids, .. } => ids.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stored value for `slot`, decoded to `f32`.
    pub fn get(&self, slot: u32) -> Option<f32> {
        match self {
            PostingList::Raw { ids, vals } => ids.iter().position(|&i| i == slot).map(|at| vals[at]),
            PostingList::Compressed { ids, vals } => {
                ids.contains(slot).then(|| vals[ids.rank(slot)].to_f32())
            }
        }
    }

    /// Calls `f(slot, value)` for postings at positions `[start, end)` of the
    /// list (insertion order for raw, ascending slot for compressed).
    #[inline]
    pub fn for_each_in(&self, start: usize, end: usize, mut f: impl FnMut(u32, f32)) {
        if start >= end {
            return;
        }
        match self {
            PostingList::Raw { ids, vals } => {
                for (&i, &v) in ids[start..end].iter().zip(&vals[start..end]) {
                    f(i, v);
                }
            }
            PostingList::Compressed { ids, vals } => {
                let Some(first) = ids.select(start) else { return };
                for (i, v) in ids.range(first..u32::MAX).zip(&vals[start..end]) {
                    f(i, v.to_f32());
                }
            }
        }
    }

    #[inline]
    pub fn for_each(&self, f: impl FnMut(u32, f32)) {
        self.for_each_in(0, self.len(), f)
    }

    /// All postings as `(slot, value)` pairs.
    pub fn to_vec(&self) -> Vec<(u32, f32)> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each(|i, v| out.push((i, v)));
        out
    }

    /// Checks the two sequences are aligned; returns a description of the
    /// first defect found.
    pub fn audit(&self) -> std::result::Result<(), String> {
        match self {
            PostingList::Raw { ids, vals } => {
                if ids.len() != vals.len() {
                    return Err(format!("{} ids vs {} values", ids.len(), vals.len()));
                }
                let mut sorted = ids.clone();
                sorted.sort_unstable();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err("duplicate slot".into());
                }
            }
            PostingList::Compressed { ids, vals } => {
                if ids.len() != vals.len() {
                    return Err(format!("{} ids vs {} values", ids.len(), vals.len()));
                }
            }
        }
        Ok(())
    }
}
