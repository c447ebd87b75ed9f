//! Sparse multidimensional array storage with compressed position headers.
//!
//! A relation over `n` dimensions is linearized row-major into a space of
//! logical positions. Only the nonempty cells are stored, in logical order,
//! so each one also has a physical position (its index among the nonempty
//! cells). A *header* converts between the two. Four header layouts are
//! provided:
//!
//! * [`SchcHeader`]: one `(last position, cumulative empties)` pair per run.
//! * [`LpcHeader`]: every logical position at a fixed width.
//! * [`BocHeader`]: wide bases every `l` elements plus narrow offsets.
//! * [`DscHeader`]: narrow gaps, with zeros marking overflows that are
//!   resolved through a wide jump sequence and an in-memory accelerator.
//!
//! The [`tuner`] module holds the exact size models and width selection,
//! [`store`] the on-disk formats, and [`workload`] / [`bench`] the synthetic
//! generators and the point-query harness.

pub mod bench;
pub mod codec;
pub mod error;
pub mod relation;
pub mod store;
pub mod text;
pub mod tuner;
pub mod width;
pub mod workload;

pub use codec::{BocHeader, DscHeader, Header, LpcHeader, PositionHeader, Probes, SchcHeader};
pub use error::{Error, Result};
pub use relation::{
    detect_runs, oracle_lookup, DimensionDecl, LogicalPositionSeq, Relation, RelationSchema, Run,
};
pub use tuner::Method;
pub use width::{UintVec, Width};
