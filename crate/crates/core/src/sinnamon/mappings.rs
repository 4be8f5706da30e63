//! The `h` random mappings from coordinates to sketch rows.

/// `h` stateless mappings `[n] → [m]` derived from a seed. Each mapping is a
/// SplitMix64-style finalizer of `(seed, o, j)` reduced modulo `m`, so the
/// same seed yields the same rows on every run and platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashMappings {
    h: u32,
    m: u32,
    seed: u64,
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

impl HashMappings {
    pub fn new(h: u32, m: u32, seed: u64) -> Self {
        assert!(h >= 1 && m >= 1, "h and m must be positive");
        Self { h, m, seed }
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row of coordinate `j` under mapping `o`.
    #[inline]
    pub fn map(&self, o: u32, j: u32) -> u32 {
        let key = (u64::from(o) << 32) | u64::from(j);
        let z = mix(self.seed.wrapping_add(GOLDEN)) ^ key.wrapping_add(1).wrapping_mul(GOLDEN);
        (mix(z) % u64::from(self.m)) as u32
    }

    /// All `h` rows of coordinate `j`, in mapping order (may repeat).
    pub fn rows(&self, j: u32) -> Vec<u32> {
        (0..self.h).map(|o| self.map(o, j)).collect()
    }

    /// Distinct rows of coordinate `j`, ascending.
    pub fn distinct_rows(&self, j: u32) -> Vec<u32> {
        let mut rows = self.rows(j);
        rows.sort_unstable();
        rows.dedup();
        rows
    }
}
