use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate out of range: {0}")]
    CoordinateRange(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("logical position sequence is empty")]
    EmptySequence,
    #[error("logical positions must be strictly increasing (index {index})")]
    NotIncreasing { index: usize },
    #[error("value {value} does not fit in {bits} bits")]
    WidthOverflow { value: u64, bits: u32 },
    #[error("offset {offset} at index {index} does not fit in {bits} bits")]
    OffsetOverflow { offset: u64, index: usize, bits: u32 },
    #[error("physical position {position} out of range (N = {len})")]
    PhysicalRange { position: u64, len: u64 },
    #[error("distribution needs at least two positions, got {0}")]
    DegenerateDistribution(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid workload: {0}")]
    Workload(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("corrupt file: {0}")]
    Corruption(String),
    #[error("count mismatch: header has {header} elements, got {payloads} payload records")]
    CountMismatch { header: u64, payloads: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
