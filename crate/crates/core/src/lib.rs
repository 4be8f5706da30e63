//! Streaming sparse maximum inner product search.
//!
//! Two engines share the same vocabulary of types:
//!
//! * [`linscan::LinScanIndex`] is an exact coordinate-at-a-time engine over
//!   non-interleaved posting lists, with an anytime variant that re-ranks a
//!   candidate pool against raw vectors.
//! * [`sinnamon::SinnamonIndex`] keeps only document ids in its inverted
//!   lists and a fixed-width upper/lower-bound sketch per document. With an
//!   unlimited budget its scores never underestimate the true inner product.
//!
//! [`analysis`] evaluates the closed-form and numerically integrated error
//! model of the sketch, [`datagen`] produces synthetic collections, and
//! [`eval`] holds retrieval metrics and insert/delete benchmarks.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod budget;
pub mod collection;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod idmap;
pub mod idsets;
pub mod linscan;
pub mod precision;
pub mod query;
mod scan;
pub mod sinnamon;
pub mod storage;
pub mod topk;
pub mod vector;

pub use budget::Budget;
pub use collection::{Collection, EngineKind};
pub use error::{Error, Result};
pub use idmap::IdMap;
pub use linscan::{LinScanIndex, PostingVariant};
pub use query::QueryParams;
pub use sinnamon::{SinnamonConfig, SinnamonIndex};
pub use storage::VectorStore;
pub use topk::{find_largest, Hit, TopKResult};
pub use vector::{inner_product, SparseVector};

/// Counters of primitive index operations, used by benchmarks and tests to
/// assert how much work an insert or delete performed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub posting_inserts: u64,
    pub posting_removals: u64,
    pub idset_inserts: u64,
    pub idset_removals: u64,
    /// Individual 16-bit sketch cells written.
    pub sketch_writes: u64,
}
