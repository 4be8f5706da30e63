//! An engine paired with the raw vector store it re-ranks against, plus
//! index-file persistence.
//!
//! Index file layout (little-endian): magic `SMIPSIDX`, `u32` version,
//! `u8` engine kind, `u32` n, `u32` m, `u32` h, `u64` seed, `u64` slot count
//! followed by one `u64` ext id per slot (`u64::MAX` marks a free slot),
//! `u64` free-list length followed by that many `u32` slots (stack order).
//! Raw vectors live next to it in `<path>.store` in the binary vector format.
//! Loading replays every live vector into its recorded slot.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::idmap::IdMap;
use crate::linscan::{LinScanIndex, PostingVariant};
use crate::query::QueryParams;
use crate::sinnamon::{SinnamonConfig, SinnamonIndex};
use crate::storage::{VectorFormat, VectorStore};
use crate::topk::TopKResult;
use crate::vector::SparseVector;
use crate::OpCounters;

pub const INDEX_MAGIC: [u8; 8] = *b"SMIPSIDX";
pub const INDEX_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    LinScan,
    /// LinScan over roaring id sets with bfloat16 values.
    LinScanCompressed,
    Sinnamon,
    /// Sinnamon with the upper-bound half only, for non-negative data.
    SinnamonPlus,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::LinScan => "linscan",
            EngineKind::LinScanCompressed => "linscan-compressed",
            EngineKind::Sinnamon => "sinnamon",
            EngineKind::SinnamonPlus => "sinnamon-plus",
        }
    }

    pub fn is_sinnamon(self) -> bool {
        matches!(self, EngineKind::Sinnamon | EngineKind::SinnamonPlus)
    }

    fn code(self) -> u8 {
        match self {
            EngineKind::LinScan => 0,
            EngineKind::LinScanCompressed => 1,
            EngineKind::Sinnamon => 2,
            EngineKind::SinnamonPlus => 3,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => EngineKind::LinScan,
            1 => EngineKind::LinScanCompressed,
            2 => EngineKind::Sinnamon,
            3 => EngineKind::SinnamonPlus,
            other => return Err(Error::IndexFile(format!("unknown engine kind {other}"))),
        })
    }
}

impl std::str::FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [EngineKind::LinScan, EngineKind::LinScanCompressed, EngineKind::Sinnamon, EngineKind::SinnamonPlus]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown engine `{s}` (expected linscan|linscan-compressed|sinnamon|sinnamon-plus)"))
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
enum Engine {
    LinScan(LinScanIndex),
    Sinnamon(SinnamonIndex),
}

/// A retrieval engine and its raw vector store, kept in sync.
#[derive(Debug, Clone)]
pub struct Collection {
    kind: EngineKind,
    config: SinnamonConfig,
    engine: Engine,
    store: VectorStore,
}

impl Collection {
    /// For LinScan kinds only `config.n` is used.
    pub fn new(kind: EngineKind, config: SinnamonConfig) -> Result<Self> {
        let engine = match kind {
            EngineKind::LinScan => Engine::LinScan(LinScanIndex::new(config.n, PostingVariant::Raw)?),
            EngineKind::LinScanCompressed => {
                Engine::LinScan(LinScanIndex::new(config.n, PostingVariant::Compressed)?)
            }
            EngineKind::Sinnamon => Engine::Sinnamon(SinnamonIndex::new(config.nonneg(false))?),
            EngineKind::SinnamonPlus => Engine::Sinnamon(SinnamonIndex::new(config.nonneg(true))?),
        };
        let config = if kind.is_sinnamon() { config.nonneg(kind == EngineKind::SinnamonPlus) } else { config };
        Ok(Self { kind, config, engine, store: VectorStore::new() })
    }

    pub fn kind(&self) -> EngineKind {
        self.kind
    }

    pub fn config(&self) -> SinnamonConfig {
        self.config
    }

    pub fn store(&self) -> &VectorStore {
        &self.store
    }

    pub fn len(&self) -> usize {
        self.id_map().live_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id_map(&self) -> &IdMap {
        match &self.engine {
            Engine::LinScan(e) => e.id_map(),
            Engine::Sinnamon(e) => e.id_map(),
        }
    }

    pub fn counters(&self) -> OpCounters {
        match &self.engine {
            Engine::LinScan(e) => e.counters(),
            Engine::Sinnamon(e) => e.counters(),
        }
    }

    pub fn linscan(&self) -> Option<&LinScanIndex> {
        match &self.engine {
            Engine::LinScan(e) => Some(e),
            Engine::Sinnamon(_) => None,
        }
    }

    pub fn sinnamon(&self) -> Option<&SinnamonIndex> {
        match &self.engine {
            Engine::Sinnamon(e) => Some(e),
            Engine::LinScan(_) => None,
        }
    }

    pub fn insert(&mut self, vector: SparseVector) -> Result<()> {
        match &mut self.engine {
            Engine::LinScan(e) => e.insert(&vector)?,
            Engine::Sinnamon(e) => e.insert(&vector)?,
        }
        self.store.put(vector)
    }

    pub fn delete(&mut self, ext_id: u64) -> Result<()> {
        match &mut self.engine {
            Engine::LinScan(e) => e.delete(ext_id, &self.store)?,
            Engine::Sinnamon(e) => e.delete(ext_id, &self.store)?,
        }
        self.store.remove(ext_id).map(|_| ())
    }

    /// Top-`k` for `q`. LinScan with an unlimited budget runs the exact
    /// scan; with a finite budget it runs the anytime variant. Sinnamon
    /// always scores with the sketch and re-ranks `k′` candidates.
    pub fn query(&self, q: &SparseVector, params: &QueryParams) -> Result<TopKResult> {
        params.validate()?;
        match &self.engine {
            Engine::LinScan(e) if params.budget.is_infinite() => e.retrieve_parallel(q, params.k, params.threads),
            Engine::LinScan(e) => e.retrieve_anytime(q, params, &self.store),
            Engine::Sinnamon(e) => e.retrieve(q, params, &self.store),
        }
    }

    /// Path of the raw-vector snapshot written beside an index file.
    pub fn store_path(path: &Path) -> PathBuf {
        let mut p = path.as_os_str().to_owned();
        p.push(".store");
        PathBuf::from(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&INDEX_MAGIC)?;
        out.write_all(&INDEX_VERSION.to_le_bytes())?;
        out.write_all(&[self.kind.code()])?;
        for v in [self.config.n, self.config.m, self.config.h] {
            out.write_all(&v.to_le_bytes())?;
        }
        out.write_all(&self.config.seed.to_le_bytes())?;
        let ids = self.id_map();
        out.write_all(&(ids.slot_count() as u64).to_le_bytes())?;
        for slot in ids.slots() {
            let code = match *slot {
                Some(u64::MAX) => return Err(Error::IndexFile("external id 2^64-1 cannot be persisted".into())),
                Some(ext) => ext,
                None => u64::MAX,
            };
            out.write_all(&code.to_le_bytes())?;
        }
        out.write_all(&(ids.free_slots().len() as u64).to_le_bytes())?;
        for slot in ids.free_slots() {
            out.write_all(&slot.to_le_bytes())?;
        }
        out.flush()?;
        self.store.save(&Self::store_path(path), VectorFormat::Binary)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut input = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        read_exact(&mut input, &mut magic)?;
        if magic != INDEX_MAGIC {
            return Err(Error::IndexFile("not an index file (bad magic)".into()));
        }
        let version = read_u32(&mut input)?;
        if version != INDEX_VERSION {
            return Err(Error::IndexFile(format!("unsupported version {version} (expected {INDEX_VERSION})")));
        }
        let mut kind = [0u8; 1];
        read_exact(&mut input, &mut kind)?;
        let kind = EngineKind::from_code(kind[0])?;
        let (n, m, h) = (read_u32(&mut input)?, read_u32(&mut input)?, read_u32(&mut input)?);
        let seed = read_u64(&mut input)?;
        let slot_count = read_u64(&mut input)?;
        let mut slots = Vec::with_capacity(slot_count.min(1 << 24) as usize);
        for _ in 0..slot_count {
            let ext = read_u64(&mut input)?;
            slots.push((ext != u64::MAX).then_some(ext));
        }
        let free_count = read_u64(&mut input)?;
        let mut free = Vec::with_capacity(free_count.min(1 << 24) as usize);
        for _ in 0..free_count {
            free.push(read_u32(&mut input)?);
        }
        if input.read(&mut [0u8; 1])? != 0 {
            return Err(Error::IndexFile("trailing bytes".into()));
        }
        let ids = IdMap::restore(slots, free)?;
        let store = VectorStore::load(&Self::store_path(path), VectorFormat::Binary)?;
        if store.len() != ids.live_count() {
            return Err(Error::IndexFile(format!(
                "store holds {} vectors but the index has {} live ids",
                store.len(),
                ids.live_count()
            )));
        }

        let mut collection = Collection::new(kind, SinnamonConfig { n, m, h, seed, nonneg: false })?;
        match &mut collection.engine {
            Engine::LinScan(e) => {
                e.restore_ids(ids.clone());
                for (slot, ext) in ids.live() {
                    e.insert_at(slot, store.fetch(ext)?)?;
                }
            }
            Engine::Sinnamon(e) => {
                e.restore_ids(ids.clone());
                for (slot, ext) in ids.live() {
                    e.insert_at(slot, store.fetch(ext)?)?;
                }
            }
        }
        collection.store = store;
        Ok(collection)
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::IndexFile("truncated index file".into()),
        _ => Error::Io(e),
    })
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
