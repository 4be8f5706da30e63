use std::io;

use crate::storage::FormatError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid vector {ext_id}: {reason}")]
    InvalidVector { ext_id: u64, reason: String },

    #[error("coordinate {coord} of vector {ext_id} is outside [0, {dims})")]
    CoordOutOfRange { ext_id: u64, coord: u32, dims: u32 },

    #[error("negative value at coordinate {coord} of vector {ext_id} in a non-negative index")]
    NegativeValue { ext_id: u64, coord: u32 },

    #[error("external id {0} is already live")]
    DuplicateId(u64),

    #[error("external id {0} is not live")]
    UnknownId(u64),

    #[error("internal slot space exhausted")]
    SlotsExhausted,

    #[error("vector {0} missing from storage")]
    StorageMiss(u64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid query parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("index file: {0}")]
    IndexFile(String),

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("z statistic undefined: zero variance")]
    ZeroVariance,

    #[error(transparent)]
    Io(#[from] io::Error),
}
