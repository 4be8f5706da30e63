//! bfloat16 conversions.
//!
//! Posting values use round-to-nearest-even. Sketch cells use directed
//! rounding so that a stored upper bound never drops below the value it
//! bounds (and a lower bound never rises above it).

use half::bf16;

/// Round to nearest, ties to even.
#[inline]
pub fn to_bf16_nearest(x: f32) -> bf16 {
    bf16::from_f32(x)
}

/// Smallest bfloat16 `>= x`.
#[inline]
pub fn to_bf16_up(x: f32) -> bf16 {
    let truncated = bf16::from_bits((x.to_bits() >> 16) as u16);
    if truncated.to_f32() == x || x.is_nan() || x < 0.0 {
        // truncation rounds negatives toward zero, i.e. upward
        truncated
    } else {
        bf16::from_bits(truncated.to_bits() + 1)
    }
}

/// Largest bfloat16 `<= x`.
#[inline]
pub fn to_bf16_down(x: f32) -> bf16 {
    -to_bf16_up(-x)
}
