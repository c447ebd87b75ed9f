//! Logical-to-physical position headers.
//!
//! Every header is built from a [`LogicalPositionSeq`](crate::LogicalPositionSeq)
//! and answers two questions: where a logical position lives among the
//! nonempty cells (`physical`, `None` for an empty cell) and which logical
//! position a physical slot holds (`logical`).

mod boc;
mod dsc;
mod lpc;
mod schc;

use std::fmt;
use std::str::FromStr;

pub use boc::BocHeader;
pub use dsc::{build_accelerator, DscHeader, ACCELERATOR_BITS, DEFAULT_STRIDE};
pub use lpc::LpcHeader;
pub use schc::SchcHeader;

use crate::error::{Error, Result};
use crate::width::Width;

/// Work counters for a lookup.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Probes {
    /// Header element comparisons and decompression steps (in memory).
    pub header_steps: u64,
    /// Positioned file reads.
    pub reads: u64,
}

impl std::ops::AddAssign for Probes {
    fn add_assign(&mut self, rhs: Probes) {
        self.header_steps += rhs.header_steps;
        self.reads += rhs.reads;
    }
}

pub trait PositionHeader {
    /// Number of nonempty cells, `N`.
    fn len(&self) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact size of the persisted header in bits.
    fn size_bits(&self) -> u64;

    fn physical_probed(&self, position: u64, probes: &mut Probes) -> Option<u64>;

    fn logical_probed(&self, physical: u64, probes: &mut Probes) -> Result<u64>;

    fn physical(&self, position: u64) -> Option<u64> {
        self.physical_probed(position, &mut Probes::default())
    }

    fn logical(&self, physical: u64) -> Result<u64> {
        self.logical_probed(physical, &mut Probes::default())
    }
}

/// Header compression method. The discriminant is the on-disk tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Schc = 1,
    Lpc = 2,
    Boc = 3,
    Dsc = 4,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Schc, Method::Lpc, Method::Boc, Method::Dsc];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Result<Method> {
        match tag {
            1 => Ok(Method::Schc),
            2 => Ok(Method::Lpc),
            3 => Ok(Method::Boc),
            4 => Ok(Method::Dsc),
            t => Err(Error::Format(format!("unknown header tag {t}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Schc => "schc",
            Method::Lpc => "lpc",
            Method::Boc => "boc",
            Method::Dsc => "dsc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s.to_ascii_lowercase().as_str() {
            "schc" => Ok(Method::Schc),
            "lpc" => Ok(Method::Lpc),
            "boc" => Ok(Method::Boc),
            "dsc" => Ok(Method::Dsc),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Width and layout parameters. Fields a method does not use are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderParams {
    /// Width of full logical positions (SCHC pairs, LPC, BOC bases, DSC jumps).
    pub iota: Width,
    /// BOC offset width.
    pub theta: Option<Width>,
    /// BOC bucket length.
    pub l: Option<u32>,
    /// DSC difference width.
    pub s: Option<Width>,
    /// DSC accelerator stride.
    pub n: Option<u16>,
}

impl HeaderParams {
    pub fn new(iota: Width) -> HeaderParams {
        HeaderParams {
            iota,
            theta: None,
            l: None,
            s: None,
            n: None,
        }
    }
}

/// Element counts that, together with [`HeaderParams`], determine a header's size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HeaderCounts {
    /// Nonempty cells.
    pub n: u64,
    /// Runs (SCHC pairs).
    pub nu: u64,
    /// Jumps (DSC).
    pub m: u64,
    /// BOC base elements.
    pub bases: u64,
}

/// One of the four header layouts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Header {
    Schc(SchcHeader),
    Lpc(LpcHeader),
    Boc(BocHeader),
    Dsc(DscHeader),
}

impl Header {
    pub fn method(&self) -> Method {
        match self {
            Header::Schc(_) => Method::Schc,
            Header::Lpc(_) => Method::Lpc,
            Header::Boc(_) => Method::Boc,
            Header::Dsc(_) => Method::Dsc,
        }
    }

    pub fn params(&self) -> HeaderParams {
        match self {
            Header::Schc(h) => HeaderParams::new(h.iota()),
            Header::Lpc(h) => HeaderParams::new(h.iota()),
            Header::Boc(h) => HeaderParams {
                theta: Some(h.theta()),
                l: Some(h.bucket_len()),
                ..HeaderParams::new(h.iota())
            },
            Header::Dsc(h) => HeaderParams {
                s: Some(h.s()),
                n: Some(h.stride()),
                ..HeaderParams::new(h.iota())
            },
        }
    }

    pub fn counts(&self) -> HeaderCounts {
        let n = self.len();
        match self {
            Header::Schc(h) => HeaderCounts {
                n,
                nu: h.run_count(),
                ..Default::default()
            },
            Header::Lpc(_) => HeaderCounts {
                n,
                ..Default::default()
            },
            Header::Boc(h) => HeaderCounts {
                n,
                bases: h.base_count(),
                ..Default::default()
            },
            Header::Dsc(h) => HeaderCounts {
                n,
                m: h.jump_count(),
                ..Default::default()
            },
        }
    }

    /// Builds a header of `method` with `params`. Missing method-specific
    /// parameters fall back to the smallest buildable width (θ), `l = 16`,
    /// the size-minimizing difference width (s) and [`DEFAULT_STRIDE`].
    pub fn build(method: Method, seq: &crate::LogicalPositionSeq, params: HeaderParams) -> Result<Header> {
        Ok(match method {
            Method::Schc => Header::Schc(SchcHeader::build(seq, params.iota)?),
            Method::Lpc => Header::Lpc(LpcHeader::build(seq, params.iota)?),
            Method::Boc => {
                let l = params.l.unwrap_or(16);
                let theta = match params.theta {
                    Some(t) => t,
                    None => crate::tuner::min_offset_width(seq, l)?,
                };
                Header::Boc(BocHeader::build(seq, l, theta, params.iota)?)
            }
            Method::Dsc => {
                let s = match params.s {
                    Some(s) => s,
                    None => crate::tuner::select_dsc_width(seq, params.iota, &Width::DIFFERENCE)?.0,
                };
                Header::Dsc(DscHeader::build(seq, s, params.iota, params.n.unwrap_or(DEFAULT_STRIDE))?)
            }
        })
    }

    fn inner(&self) -> &dyn PositionHeader {
        match self {
            Header::Schc(h) => h,
            Header::Lpc(h) => h,
            Header::Boc(h) => h,
            Header::Dsc(h) => h,
        }
    }

    /// Appends the persisted header payload (little-endian, byte-aligned).
    pub fn write_payload(&self, out: &mut Vec<u8>) {
        match self {
            Header::Schc(h) => h.write_payload(out),
            Header::Lpc(h) => h.positions().write_le(out),
            Header::Boc(h) => {
                h.bases().write_le(out);
                h.offsets().write_le(out);
            }
            Header::Dsc(h) => {
                h.difference().write_le(out);
                h.jumps().write_le(out);
            }
        }
    }

    /// Inverse of [`Header::write_payload`]. Returns the header and the
    /// number of bytes consumed.
    pub fn read_payload(
        method: Method,
        params: HeaderParams,
        counts: HeaderCounts,
        bytes: &[u8],
    ) -> Result<(Header, usize)> {
        let n = usize_count(counts.n)?;
        let header = match method {
            Method::Schc => Header::Schc(SchcHeader::read_payload(
                params.iota,
                usize_count(counts.nu)?,
                bytes,
            )?),
            Method::Lpc => Header::Lpc(LpcHeader::from_positions(crate::UintVec::read_le(
                params.iota,
                n,
                bytes,
            )?)?),
            Method::Boc => {
                let theta = params.theta.ok_or_else(|| missing("theta"))?;
                let l = params.l.ok_or_else(|| missing("l"))?;
                if l == 0 {
                    return Err(Error::Format("BOC bucket length 0".into()));
                }
                let bases = boc::base_count(counts.n, l);
                let base_vec = crate::UintVec::read_le(params.iota, usize_count(bases)?, bytes)?;
                let rest = &bytes[base_vec.len() * params.iota.bytes()..];
                let offsets = crate::UintVec::read_le(theta, n, rest)?;
                Header::Boc(BocHeader::from_parts(base_vec, offsets, l)?)
            }
            Method::Dsc => {
                let s = params.s.ok_or_else(|| missing("s"))?;
                let stride = params.n.ok_or_else(|| missing("n"))?;
                let difference = crate::UintVec::read_le(s, n, bytes)?;
                let rest = &bytes[n * s.bytes()..];
                let jumps = crate::UintVec::read_le(params.iota, usize_count(counts.m)?, rest)?;
                Header::Dsc(DscHeader::from_parts(difference, jumps, stride)?)
            }
        };
        let used = (header.size_bits() / 8) as usize;
        Ok((header, used))
    }
}

fn missing(name: &str) -> Error {
    Error::Format(format!("missing header parameter {name}"))
}

fn usize_count(v: u64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Format(format!("count {v} too large")))
}

impl PositionHeader for Header {
    fn len(&self) -> u64 {
        self.inner().len()
    }

    fn size_bits(&self) -> u64 {
        self.inner().size_bits()
    }

    fn physical_probed(&self, position: u64, probes: &mut Probes) -> Option<u64> {
        self.inner().physical_probed(position, probes)
    }

    fn logical_probed(&self, physical: u64, probes: &mut Probes) -> Result<u64> {
        self.inner().logical_probed(physical, probes)
    }
}

pub(crate) fn check_nonempty(seq: &crate::LogicalPositionSeq) -> Result<()> {
    if seq.is_empty() {
        Err(Error::EmptySequence)
    } else {
        Ok(())
    }
}

pub(crate) fn check_fits(seq: &crate::LogicalPositionSeq, width: Width) -> Result<()> {
    match seq.last() {
        Some(last) if !width.holds(last) => Err(Error::WidthOverflow {
            value: last,
            bits: width.bits(),
        }),
        _ => Ok(()),
    }
}

pub(crate) fn check_physical(physical: u64, len: u64) -> Result<usize> {
    if physical >= len {
        Err(Error::PhysicalRange {
            position: physical,
            len,
        })
    } else {
        Ok(physical as usize)
    }
}
