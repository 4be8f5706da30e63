//! External id to internal slot mapping with a free list of recycled slots.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Bidirectional map between 64-bit external ids and dense 32-bit internal
/// slots. Released slots go on a stack and are handed out again before the
/// slot space grows.
#[derive(Debug, Clone, Default)]
pub struct IdMap {
    ext_to_int: HashMap<u64, u32>,
    int_to_ext: Vec<Option<u64>>,
    free_list: Vec<u32>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns a slot to `ext_id`, popping the free list when possible.
    pub fn assign(&mut self, ext_id: u64) -> Result<u32> {
        if self.ext_to_int.contains_key(&ext_id) {
            return Err(Error::DuplicateId(ext_id));
        }
        let slot = match self.free_list.pop() {
            Some(slot) => slot,
            None => {
                let slot = u32::try_from(self.int_to_ext.len()).map_err(|_| Error::SlotsExhausted)?;
                if slot == u32::MAX {
                    return Err(Error::SlotsExhausted);
                }
                self.int_to_ext.push(None);
                slot
            }
        };
        self.int_to_ext[slot as usize] = Some(ext_id);
        self.ext_to_int.insert(ext_id, slot);
        Ok(slot)
    }

    /// Releases the slot held by `ext_id` and returns it.
    pub fn release(&mut self, ext_id: u64) -> Result<u32> {
        let slot = self.ext_to_int.remove(&ext_id).ok_or(Error::UnknownId(ext_id))?;
        self.int_to_ext[slot as usize] = None;
        self.free_list.push(slot);
        Ok(slot)
    }

    #[inline]
    pub fn slot_of(&self, ext_id: u64) -> Option<u32> {
        self.ext_to_int.get(&ext_id).copied()
    }

    #[inline]
    pub fn ext_of(&self, slot: u32) -> Option<u64> {
        self.int_to_ext.get(slot as usize).copied().flatten()
    }

    #[inline]
    pub fn is_live_slot(&self, slot: u32) -> bool {
        self.ext_of(slot).is_some()
    }

    /// Number of slots ever issued (live plus free).
    #[inline]
    pub fn slot_count(&self) -> usize {
        self.int_to_ext.len()
    }

    #[inline]
    pub fn live_count(&self) -> usize {
        self.ext_to_int.len()
    }

    pub fn free_slots(&self) -> &[u32] {
        &self.free_list
    }

    /// Slot table in slot order; `None` marks a free slot.
    pub fn slots(&self) -> &[Option<u64>] {
        &self.int_to_ext
    }

    /// Live `(slot, ext_id)` pairs in ascending slot order.
    pub fn live(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.int_to_ext.iter().enumerate().filter_map(|(s, e)| e.map(|e| (s as u32, e)))
    }

    /// Score template: `0.0` on live slots and `-∞` on free slots, so free
    /// slots are never selected by [`crate::topk::find_largest`].
    pub fn score_template(&self) -> Vec<f64> {
        self.int_to_ext.iter().map(|e| if e.is_some() { 0.0 } else { f64::NEG_INFINITY }).collect()
    }

    /// Rebuilds a map from a persisted slot table and free-list stack.
    pub fn restore(slots: Vec<Option<u64>>, free_list: Vec<u32>) -> Result<Self> {
        let mut ext_to_int = HashMap::with_capacity(slots.len());
        for (slot, ext) in slots.iter().enumerate() {
            if let Some(ext) = *ext {
                if ext_to_int.insert(ext, slot as u32).is_some() {
                    return Err(Error::DuplicateId(ext));
                }
            }
        }
        let mut seen = vec![false; slots.len()];
        for &slot in &free_list {
            let s = slot as usize;
            if s >= slots.len() || slots[s].is_some() || seen[s] {
                return Err(Error::IndexFile(format!("inconsistent free slot {slot}")));
            }
            seen[s] = true;
        }
        if slots.iter().filter(|e| e.is_none()).count() != free_list.len() {
            return Err(Error::IndexFile("free list does not cover every free slot".into()));
        }
        Ok(Self { ext_to_int, int_to_ext: slots, free_list })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_slot_and_recycling() {
        let mut ids = IdMap::new();
        assert_eq!(ids.assign(7).unwrap(), 0);
        assert_eq!(ids.release(7).unwrap(), 0);
        assert_eq!(ids.assign(9).unwrap(), 0);
        assert_eq!(ids.ext_of(0), Some(9));
    }

    #[test]
    fn distinct_errors() {
        let mut ids = IdMap::new();
        ids.assign(1).unwrap();
        assert!(matches!(ids.assign(1), Err(Error::DuplicateId(1))));
        assert!(matches!(ids.release(2), Err(Error::UnknownId(2))));
    }

    #[test]
    fn slot_space_tracks_peak_live_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ids = IdMap::new();
        let mut live: Vec<u64> = Vec::new();
        let mut next = 0u64;
        let mut peak = 0usize;
        for _ in 0..10_000 {
            if live.is_empty() || rng.random_bool(0.55) {
                ids.assign(next).unwrap();
                live.push(next);
                next += 1;
            } else {
                let i = rng.random_range(0..live.len());
                ids.release(live.swap_remove(i)).unwrap();
            }
            peak = peak.max(live.len());
        }
        assert_eq!(ids.slot_count(), peak);
    }

    #[test]
    fn restore_roundtrip_and_rejects_inconsistency() {
        let mut ids = IdMap::new();
        for e in 0..5 {
            ids.assign(e * 10).unwrap();
        }
        ids.release(20).unwrap();
        ids.release(0).unwrap();
        let back = IdMap::restore(ids.slots().to_vec(), ids.free_slots().to_vec()).unwrap();
        assert_eq!(back.slot_of(30), Some(3));
        assert_eq!(back.free_slots(), &[2, 0]);
        assert!(IdMap::restore(vec![Some(1), None], vec![]).is_err());
        assert!(IdMap::restore(vec![Some(1), None], vec![0]).is_err());
    }

    proptest! {
        #[test]
        fn maps_stay_inverse(ops in prop::collection::vec((any::<bool>(), 0u64..40), 0..400)) {
            let mut ids = IdMap::new();
            for (insert, ext) in ops {
                if insert { let _ = ids.assign(ext); } else { let _ = ids.release(ext); }
                for (slot, e) in ids.live() {
                    prop_assert_eq!(ids.slot_of(e), Some(slot));
                }
                for &f in ids.free_slots() {
                    prop_assert!(!ids.is_live_slot(f));
                }
                prop_assert_eq!(ids.live().count(), ids.live_count());
            }
        }
    }
}
