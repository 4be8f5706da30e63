//! Insert throughput and delete latency benchmarks. Timings are reported,
//! never asserted; operation counters make the work reproducible.

use std::fmt::Write as _;
use std::time::Instant;

use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::vector::SparseVector;
use crate::OpCounters;

/// Mean insert throughput over one bucket, keyed by the index size after
/// the bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertSample {
    pub index_size: usize,
    pub vectors_per_sec: f64,
}

/// Mean delete latency over one bucket, keyed by the number of deletions
/// done after the bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeleteSample {
    pub deleted_count: usize,
    pub ms_per_delete: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertReport {
    pub samples: Vec<InsertSample>,
    /// Work done by one trial; every trial does the same work.
    pub counters: OpCounters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeleteReport {
    pub samples: Vec<DeleteSample>,
    pub counters: OpCounters,
}

impl InsertReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("index_size\tvectors_per_sec\n");
        for s in &self.samples {
            let _ = writeln!(out, "{}\t{:.3}", s.index_size, s.vectors_per_sec);
        }
        out
    }
}

impl DeleteReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("deleted_count\tms_per_delete\n");
        for s in &self.samples {
            let _ = writeln!(out, "{}\t{:.6}", s.deleted_count, s.ms_per_delete);
        }
        out
    }
}

fn check(bucket: usize, trials: usize) -> Result<()> {
    if bucket == 0 || trials == 0 {
        return Err(Error::InvalidParams("bucket size and trial count must be at least 1".into()));
    }
    Ok(())
}

fn diff(after: OpCounters, before: OpCounters) -> OpCounters {
    OpCounters {
        posting_inserts: after.posting_inserts - before.posting_inserts,
        posting_removals: after.posting_removals - before.posting_removals,
        idset_inserts: after.idset_inserts - before.idset_inserts,
        idset_removals: after.idset_removals - before.idset_removals,
        sketch_writes: after.sketch_writes - before.sketch_writes,
    }
}

/// Streams `vectors` into fresh copies of the empty `template`, `trials`
/// times, timing every `bucket` inserts. Sample rates are trial means.
pub fn bench_insert(template: &Collection, vectors: &[SparseVector], bucket: usize, trials: usize) -> Result<InsertReport> {
    check(bucket, trials)?;
    if !template.is_empty() {
        return Err(Error::InvalidParams("insert benchmark needs an empty collection".into()));
    }
    let buckets = vectors.len().div_ceil(bucket);
    let mut rates = vec![0.0; buckets];
    let mut counters = OpCounters::default();
    for _ in 0..trials {
        let mut c = template.clone();
        let start_counters = c.counters();
        for (b, chunk) in vectors.chunks(bucket).enumerate() {
            let t = Instant::now();
            for v in chunk {
                c.insert(v.clone())?;
            }
            let secs = t.elapsed().as_secs_f64().max(1e-9);
            rates[b] += chunk.len() as f64 / secs / trials as f64;
        }
        counters = diff(c.counters(), start_counters);
    }
    let samples = rates
        .into_iter()
        .enumerate()
        .map(|(b, vectors_per_sec)| InsertSample { index_size: ((b + 1) * bucket).min(vectors.len()), vectors_per_sec })
        .collect();
    Ok(InsertReport { samples, counters })
}

/// Deletes `ids` in order from fresh copies of the loaded `collection`,
/// `trials` times, timing every `bucket` deletions.
pub fn bench_delete(collection: &Collection, ids: &[u64], bucket: usize, trials: usize) -> Result<DeleteReport> {
    check(bucket, trials)?;
    let buckets = ids.len().div_ceil(bucket);
    let mut latency = vec![0.0; buckets];
    let mut counters = OpCounters::default();
    for _ in 0..trials {
        let mut c = collection.clone();
        let start_counters = c.counters();
        for (b, chunk) in ids.chunks(bucket).enumerate() {
            let t = Instant::now();
            for &id in chunk {
                c.delete(id)?;
            }
            let ms = t.elapsed().as_secs_f64() * 1e3;
            latency[b] += ms / chunk.len() as f64 / trials as f64;
        }
        counters = diff(c.counters(), start_counters);
    }
    let samples = latency
        .into_iter()
        .enumerate()
        .map(|(b, ms_per_delete)| DeleteSample { deleted_count: ((b + 1) * bucket).min(ids.len()), ms_per_delete })
        .collect();
    Ok(DeleteReport { samples, counters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ValueDist;
    use crate::collection::EngineKind;
    use crate::datagen::{generate_parallel, GenSpec};
    use crate::sinnamon::SinnamonConfig;

    fn data(count: u64) -> Vec<SparseVector> {
        let spec = GenSpec { count, dims: 500, psi: 20.0, dist: ValueDist::gaussian(0.0, 1.0).unwrap(), seed: 3 };
        generate_parallel(&spec, 2).unwrap()
    }

    fn empty(kind: EngineKind) -> Collection {
        Collection::new(kind, SinnamonConfig::new(500, 10, 2)).unwrap()
    }

    #[test]
    fn trivial_stream_gives_one_sample_per_vector() {
        let r = bench_insert(&empty(EngineKind::Sinnamon), &data(3), 1, 2).unwrap();
        let sizes: Vec<usize> = r.samples.iter().map(|s| s.index_size).collect();
        assert_eq!(sizes, vec![1, 2, 3]);
        assert!(r.samples.iter().all(|s| s.vectors_per_sec > 0.0));
        assert_eq!(r.to_tsv().lines().count(), 4);
    }

    #[test]
    fn sinnamon_delete_writes_no_sketch_cells() {
        let vs = data(300);
        let mut c = empty(EngineKind::Sinnamon);
        for v in &vs {
            c.insert(v.clone()).unwrap();
        }
        let ids: Vec<u64> = vs.iter().map(|v| v.ext_id()).collect();
        let r = bench_delete(&c, &ids, 50, 1).unwrap();
        assert_eq!(r.counters.sketch_writes, 0);
        assert_eq!(r.counters.idset_removals, vs.iter().map(|v| v.nnz() as u64).sum::<u64>());
        assert_eq!(r.samples.last().unwrap().deleted_count, 300);
    }

    #[test]
    fn work_is_deterministic() {
        let vs = data(200);
        for kind in [EngineKind::LinScan, EngineKind::LinScanCompressed, EngineKind::Sinnamon] {
            let a = bench_insert(&empty(kind), &vs, 64, 1).unwrap();
            let b = bench_insert(&empty(kind), &vs, 64, 2).unwrap();
            assert_eq!(a.counters, b.counters);
            assert_eq!(a.samples.len(), 4);
            assert_eq!(a.samples[3].index_size, 200);
        }
    }
}
