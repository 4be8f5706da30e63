//! Column-per-document matrix of 16-bit upper and lower bounds.

use half::bf16;

use crate::precision::{to_bf16_down, to_bf16_up};

/// `m` upper-bound rows followed by `m` lower-bound rows (upper only when
/// non-negative). Each row is one contiguous growable array indexed by slot,
/// so scoring one inverted list walks a handful of rows.
#[derive(Debug, Clone)]
pub struct SketchMatrix {
    m: usize,
    nonneg: bool,
    rows: Vec<Vec<bf16>>,
}

impl SketchMatrix {
    pub fn new(m: usize, nonneg: bool) -> Self {
        let count = if nonneg { m } else { 2 * m };
        Self { m, nonneg, rows: vec![Vec::new(); count] }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn has_lower(&self) -> bool {
        !self.nonneg
    }

    /// Total number of rows (`m` or `2m`).
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Grows every row so that `slot` is a valid column.
    pub fn ensure_column(&mut self, slot: u32) {
        let need = slot as usize + 1;
        if need > self.columns() {
            for row in &mut self.rows {
                row.resize(need, bf16::ZERO);
            }
        }
    }

    /// Overwrites every row of the column with zero. Returns cells written.
    pub fn clear_column(&mut self, slot: u32) -> u64 {
        for row in &mut self.rows {
            row[slot as usize] = bf16::ZERO;
        }
        self.rows.len() as u64
    }

    /// Stores an upper bound for row `r`, rounding toward `+∞`.
    #[inline]
    pub fn set_upper(&mut self, r: usize, slot: u32, value: f32) {
        self.rows[r][slot as usize] = to_bf16_up(value);
    }

    /// Stores a lower bound for row `r`, rounding toward `-∞`.
    #[inline]
    pub fn set_lower(&mut self, r: usize, slot: u32, value: f32) {
        debug_assert!(!self.nonneg);
        self.rows[self.m + r][slot as usize] = to_bf16_down(value);
    }

    #[inline]
    pub fn upper_row(&self, r: usize) -> &[bf16] {
        &self.rows[r]
    }

    #[inline]
    pub fn lower_row(&self, r: usize) -> &[bf16] {
        &self.rows[self.m + r]
    }

    pub fn upper(&self, r: usize, slot: u32) -> f32 {
        self.rows[r][slot as usize].to_f32()
    }

    pub fn lower(&self, r: usize, slot: u32) -> f32 {
        self.rows[self.m + r][slot as usize].to_f32()
    }

    /// Bytes held by cell storage.
    pub fn bytes(&self) -> usize {
        self.rows.iter().map(|r| r.len() * 2).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_rounding() {
        let mut s = SketchMatrix::new(3, false);
        assert_eq!(s.row_count(), 6);
        s.ensure_column(4);
        assert_eq!(s.columns(), 5);
        s.set_upper(1, 4, 0.3);
        s.set_lower(1, 4, 0.3);
        assert!(s.upper(1, 4) > 0.3 && s.lower(1, 4) < 0.3);
        assert_eq!(s.clear_column(4), 6);
        assert_eq!((s.upper(1, 4), s.lower(1, 4)), (0.0, 0.0));
        assert_eq!(SketchMatrix::new(3, true).row_count(), 3);
    }
}
