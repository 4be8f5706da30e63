//! Retrieval metrics, TREC file I/O and insert/delete benchmarks.

pub mod bench;
pub mod metrics;
pub mod trec;

pub use bench::{bench_delete, bench_insert, DeleteReport, DeleteSample, InsertReport, InsertSample};
pub use metrics::{mrr_at, ndcg_at, recall_wrt_exact, MetricReport};
pub use trec::{Qrels, Run};
