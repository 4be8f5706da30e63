//! Raw vector storage and on-disk vector formats.

mod format;

use std::collections::HashMap;
use std::path::Path;

pub use format::{
    read_vectors, write_binary, write_text, write_vectors, BinaryReader, FormatError, FormatErrorKind,
    Position, TextReader, VectorFormat, BINARY_MAGIC,
};

use crate::error::{Error, Result};
use crate::vector::SparseVector;

/// In-memory store of raw vectors keyed by external id. This is the storage
/// the re-ranking stages fetch from.
#[derive(Debug, Clone, Default)]
pub struct VectorStore {
    vectors: HashMap<u64, SparseVector>,
}

impl VectorStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, vector: SparseVector) -> Result<()> {
        let id = vector.ext_id();
        if self.vectors.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.vectors.insert(id, vector);
        Ok(())
    }

    pub fn fetch(&self, ext_id: u64) -> Result<&SparseVector> {
        self.vectors.get(&ext_id).ok_or(Error::StorageMiss(ext_id))
    }

    pub fn remove(&mut self, ext_id: u64) -> Result<SparseVector> {
        self.vectors.remove(&ext_id).ok_or(Error::StorageMiss(ext_id))
    }

    pub fn contains(&self, ext_id: u64) -> bool {
        self.vectors.contains_key(&ext_id)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Vectors in ascending external id order.
    pub fn sorted(&self) -> Vec<&SparseVector> {
        let mut all: Vec<&SparseVector> = self.vectors.values().collect();
        all.sort_by_key(|v| v.ext_id());
        all
    }

    /// Writes every vector, ascending by id, as one snapshot file.
    pub fn save(&self, path: &Path, format: VectorFormat) -> Result<()> {
        write_vectors(path, format, self.sorted().into_iter())
    }

    pub fn load(path: &Path, format: VectorFormat) -> Result<Self> {
        let mut store = Self::new();
        for v in read_vectors(path, format)? {
            store.put(v)?;
        }
        Ok(store)
    }
}
