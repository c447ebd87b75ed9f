//! On-disk formats.
//!
//! Store file (multidimensional representation), all integers little-endian:
//!
//! ```text
//! [magic "MDHC" 4][version 2][dim count 2]
//! [per dim: name len 2, name, value count 4, label kind 1,
//!   explicit labels only: per value len 2, bytes]
//! [payload_len 4][header tag 1][ι 1][θ 1][l 4][s 1][n 2][N 8][ν 8][M 8]
//! [header payload][N cell payloads in physical order]
//! ```
//!
//! Label kind 0 means the labels are the decimal ordinals and are not
//! stored; kind 1 stores them. Unused parameter and count fields are zero.
//! The header loads fully into memory; cell payloads are fetched with one
//! positioned read each.
//!
//! Table file (baseline): `[magic "MDTB"][version 2][schema as above]
//! [record count 8][records]`, each record being one 4-byte ordinal per
//! dimension followed by the payload, sorted by coordinate tuple.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;

use crate::codec::{Header, HeaderCounts, HeaderParams, Method, PositionHeader, Probes};
use crate::error::{Error, Result};
use crate::relation::{DimensionDecl, Relation, RelationSchema};
use crate::tuner::model_size_bits;
use crate::width::Width;

pub const STORE_MAGIC: [u8; 4] = *b"MDHC";
pub const TABLE_MAGIC: [u8; 4] = *b"MDTB";
pub const VERSION: u16 = 1;
const LABELS_NUMBERED: u8 = 0;
const LABELS_EXPLICIT: u8 = 1;

fn encode_schema(schema: &RelationSchema, out: &mut Vec<u8>) -> Result<()> {
    out.extend_from_slice(&(schema.arity() as u16).to_le_bytes());
    for dim in schema.dimensions() {
        put_str(out, dim.name())?;
        out.extend_from_slice(&(dim.cardinality() as u32).to_le_bytes());
        match dim.explicit_labels() {
            None => out.push(LABELS_NUMBERED),
            Some(values) => {
                out.push(LABELS_EXPLICIT);
                for v in values {
                    put_str(out, v)?;
                }
            }
        }
    }
    out.extend_from_slice(&schema.payload_len().to_le_bytes());
    Ok(())
}

fn put_str(out: &mut Vec<u8>, s: &str) -> Result<()> {
    let len = u16::try_from(s.len())
        .map_err(|_| Error::Schema(format!("label longer than 65535 bytes: {s:.20}...")))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

/// Serializes a store to bytes. `payloads` holds `N · payload_len` bytes in
/// physical order.
pub fn encode_store(schema: &RelationSchema, header: &Header, payloads: &[u8]) -> Result<Vec<u8>> {
    let n = header.len();
    let plen = schema.payload_len() as u64;
    if payloads.len() as u64 != n * plen {
        return Err(Error::CountMismatch {
            header: n,
            payloads: (payloads.len() as u64).checked_div(plen).unwrap_or(0),
        });
    }
    let mut out = Vec::with_capacity(64 + (header.size_bits() / 8) as usize + payloads.len());
    out.extend_from_slice(&STORE_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    encode_schema(schema, &mut out)?;
    out.push(header.method().tag());
    let p = header.params();
    out.push(p.iota.bits() as u8);
    out.push(p.theta.map_or(0, |w| w.bits() as u8));
    out.extend_from_slice(&p.l.unwrap_or(0).to_le_bytes());
    out.push(p.s.map_or(0, |w| w.bits() as u8));
    out.extend_from_slice(&p.n.unwrap_or(0).to_le_bytes());
    let c = header.counts();
    out.extend_from_slice(&c.n.to_le_bytes());
    out.extend_from_slice(&c.nu.to_le_bytes());
    out.extend_from_slice(&c.m.to_le_bytes());
    header.write_payload(&mut out);
    out.extend_from_slice(payloads);
    Ok(out)
}

/// Writes a store file and returns the number of bytes written.
pub fn write_store(
    schema: &RelationSchema,
    header: &Header,
    payloads: &[u8],
    path: impl AsRef<Path>,
) -> Result<u64> {
    let bytes = encode_store(schema, header, payloads)?;
    let mut f = File::create(path)?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    Ok(bytes.len() as u64)
}

/// Header built from `relation`'s positions, written with its payloads.
pub fn write_relation_store(relation: &Relation, header: &Header, path: impl AsRef<Path>) -> Result<u64> {
    if header.len() != relation.len() as u64 {
        return Err(Error::CountMismatch {
            header: header.len(),
            payloads: relation.len() as u64,
        });
    }
    write_store(relation.schema(), header, relation.payloads(), path)
}

/// Sequential decoder that maps short reads to corruption errors.
struct Decoder<R> {
    inner: R,
    pos: u64,
    limit: u64,
}

impl<R: Read> Decoder<R> {
    fn bytes(&mut self, n: u64, what: &str) -> Result<Vec<u8>> {
        if self.pos + n > self.limit {
            return Err(Error::Corruption(format!("truncated {what}")));
        }
        let mut buf = vec![0u8; n as usize];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => Error::Corruption(format!("truncated {what}")),
            _ => Error::Io(e),
        })?;
        self.pos += n;
        Ok(buf)
    }

    fn array<const K: usize>(&mut self, what: &str) -> Result<[u8; K]> {
        Ok(self.bytes(K as u64, what)?.try_into().unwrap())
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.array::<1>(what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array(what)?))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array(what)?))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let len = self.u16(what)?;
        String::from_utf8(self.bytes(len as u64, what)?)
            .map_err(|_| Error::Format(format!("{what} is not UTF-8")))
    }

    fn magic(&mut self, expected: [u8; 4]) -> Result<()> {
        let magic = self.array::<4>("magic")?;
        if magic != expected {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&magic),
                String::from_utf8_lossy(&expected)
            )));
        }
        let version = self.u16("version")?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        Ok(())
    }

    fn schema(&mut self) -> Result<RelationSchema> {
        let dims = self.u16("dimension count")?;
        let mut decls = Vec::with_capacity(dims as usize);
        for _ in 0..dims {
            let name = self.string("dimension name")?;
            let count = self.u32("value count")?;
            let decl = match self.u8("label kind")? {
                LABELS_NUMBERED => DimensionDecl::numbered(name, count),
                LABELS_EXPLICIT => {
                    // each label takes at least its 2-byte length
                    if self.pos + 2 * count as u64 > self.limit {
                        return Err(Error::Corruption("truncated dimension values".into()));
                    }
                    let values = (0..count)
                        .map(|_| self.string("dimension value"))
                        .collect::<Result<Vec<_>>>()?;
                    DimensionDecl::new(name, values)
                }
                other => return Err(Error::Format(format!("bad label kind {other}"))),
            };
            decls.push(decl.map_err(|e| Error::Format(e.to_string()))?);
        }
        let payload_len = self.u32("payload length")?;
        RelationSchema::new(decls, payload_len).map_err(|e| Error::Format(e.to_string()))
    }
}

fn width_field(bits: u8, name: &str) -> Result<Option<Width>> {
    match bits {
        0 => Ok(None),
        b => Width::from_bits(b as u32)
            .map(Some)
            .map_err(|_| Error::Format(format!("bad {name} width {b}"))),
    }
}

#[cfg(unix)]
fn read_at(file: &File, buf: &mut [u8], offset: u64) -> io::Result<()> {
    use std::os::unix::fs::FileExt;
    file.read_exact_at(buf, offset)
}

#[cfg(windows)]
fn read_at(file: &File, buf: &mut [u8], offset: u64) -> io::Result<()> {
    use std::os::windows::fs::FileExt;
    let mut done = 0;
    while done < buf.len() {
        match file.seek_read(&mut buf[done..], offset + done as u64)? {
            0 => return Err(io::ErrorKind::UnexpectedEof.into()),
            n => done += n,
        }
    }
    Ok(())
}

/// An opened store: schema and header in memory, payloads on disk.
#[derive(Debug)]
pub struct Store {
    schema: RelationSchema,
    header: Header,
    file: File,
    payload_offset: u64,
}

impl Store {
    pub fn open(path: impl AsRef<Path>) -> Result<Store> {
        let file = File::open(path)?;
        let file_len = file.metadata()?.len();
        let mut d = Decoder {
            inner: BufReader::new(&file),
            pos: 0,
            limit: file_len,
        };
        d.magic(STORE_MAGIC)?;
        let schema = d.schema()?;
        let method = Method::from_tag(d.u8("header tag")?)?;
        let iota = width_field(d.u8("iota")?, "iota")?
            .ok_or_else(|| Error::Format("iota must be set".into()))?;
        let theta = width_field(d.u8("theta")?, "theta")?;
        let l = d.u32("l")?;
        let s = width_field(d.u8("s")?, "s")?;
        let n = d.u16("n")?;
        let params = HeaderParams {
            iota,
            theta,
            l: (l != 0).then_some(l),
            s,
            n: (n != 0).then_some(n),
        };
        let counts = HeaderCounts {
            n: d.u64("N")?,
            nu: d.u64("nu")?,
            m: d.u64("M")?,
            bases: 0,
        };
        let bits = model_size_bits(method, &params, &counts).map_err(|e| Error::Format(e.to_string()))?;
        let bytes = d.bytes(bits / 8, "header payload")?;
        let (header, _) = Header::read_payload(method, params, counts, &bytes)?;
        if header.len() != counts.n {
            return Err(Error::Corruption("header element count disagrees with N".into()));
        }
        if let Some(last) = header.len().checked_sub(1).map(|p| header.logical(p)).transpose()? {
            if last >= schema.cell_count() {
                return Err(Error::Corruption("header positions exceed the logical space".into()));
            }
        }
        let payload_offset = d.pos;
        let expected = payload_offset + counts.n * schema.payload_len() as u64;
        match file_len.cmp(&expected) {
            Ordering::Less => return Err(Error::Corruption("truncated payload block".into())),
            Ordering::Greater => return Err(Error::Corruption("trailing bytes after payload block".into())),
            Ordering::Equal => {}
        }
        drop(d);
        Ok(Store {
            schema,
            header,
            file,
            payload_offset,
        })
    }

    pub fn schema(&self) -> &RelationSchema {
        &self.schema
    }

    pub fn header(&self) -> &Header {
        &self.header
    }

    pub fn len(&self) -> u64 {
        self.header.len()
    }

    pub fn is_empty(&self) -> bool {
        self.header.is_empty()
    }

    /// Payload of physical position `p`, in one positioned read.
    pub fn read_payload(&self, p: u64, probes: &mut Probes) -> Result<Vec<u8>> {
        if p >= self.len() {
            return Err(Error::PhysicalRange {
                position: p,
                len: self.len(),
            });
        }
        let plen = self.schema.payload_len() as usize;
        let mut buf = vec![0u8; plen];
        if plen > 0 {
            read_at(&self.file, &mut buf, self.payload_offset + p * plen as u64)?;
            probes.reads += 1;
        }
        Ok(buf)
    }

    pub fn point_query(&self, coords: &[u32]) -> Result<Option<Vec<u8>>> {
        self.point_query_probed(coords, &mut Probes::default())
    }

    pub fn point_query_probed(&self, coords: &[u32], probes: &mut Probes) -> Result<Option<Vec<u8>>> {
        let l = self.schema.linearize(coords)?;
        match self.header.physical_probed(l, probes) {
            Some(p) => self.read_payload(p, probes).map(Some),
            None => Ok(None),
        }
    }

    /// Coordinates of the cell at physical position `p`.
    pub fn coords_at(&self, p: u64) -> Result<Vec<u32>> {
        self.schema.delinearize(self.header.logical(p)?)
    }
}

pub fn encode_table(relation: &Relation) -> Result<Vec<u8>> {
    let schema = relation.schema();
    let record_len = 4 * schema.arity() + schema.payload_len() as usize;
    let mut out = Vec::with_capacity(32 + relation.len() * record_len);
    out.extend_from_slice(&TABLE_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    encode_schema(schema, &mut out)?;
    out.extend_from_slice(&(relation.len() as u64).to_le_bytes());
    for (p, &l) in relation.positions().as_slice().iter().enumerate() {
        for c in schema.delinearize(l)? {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend_from_slice(relation.payload(p));
    }
    Ok(out)
}

/// Writes the baseline table file and returns its size in bytes.
pub fn write_table(relation: &Relation, path: impl AsRef<Path>) -> Result<u64> {
    let bytes = encode_table(relation)?;
    let mut f = File::create(path)?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    Ok(bytes.len() as u64)
}

/// Size in bytes of the table file for `records` records, without building it.
pub fn table_file_len(schema: &RelationSchema, records: u64) -> Result<u64> {
    let mut prefix = Vec::new();
    encode_schema(schema, &mut prefix)?;
    let record_len = 4 * schema.arity() as u64 + schema.payload_len() as u64;
    Ok(TABLE_MAGIC.len() as u64 + 2 + prefix.len() as u64 + 8 + records * record_len)
}

/// The table representation: sorted fixed-length records searched on disk.
#[derive(Debug)]
pub struct Table {
    schema: RelationSchema,
    file: File,
    records_offset: u64,
    record_count: u64,
    record_len: u64,
}

impl Table {
    pub fn open(path: impl AsRef<Path>) -> Result<Table> {
        let file = File::open(path)?;
        let file_len = file.metadata()?.len();
        let mut d = Decoder {
            inner: BufReader::new(&file),
            pos: 0,
            limit: file_len,
        };
        d.magic(TABLE_MAGIC)?;
        let schema = d.schema()?;
        let record_count = d.u64("record count")?;
        let records_offset = d.pos;
        drop(d);
        let record_len = 4 * schema.arity() as u64 + schema.payload_len() as u64;
        let expected = record_count
            .checked_mul(record_len)
            .and_then(|b| b.checked_add(records_offset))
            .ok_or_else(|| Error::Corruption("record count overflows".into()))?;
        if file_len < expected {
            return Err(Error::Corruption("truncated record block".into()));
        }
        if file_len > expected {
            return Err(Error::Corruption("trailing bytes after record block".into()));
        }
        Ok(Table {
            schema,
            file,
            records_offset,
            record_count,
            record_len,
        })
    }

    pub fn schema(&self) -> &RelationSchema {
        &self.schema
    }

    pub fn len(&self) -> u64 {
        self.record_count
    }

    pub fn is_empty(&self) -> bool {
        self.record_count == 0
    }

    /// Record `i` as (ordinals, payload), in one positioned read.
    pub fn record(&self, i: u64, probes: &mut Probes) -> Result<(Vec<u32>, Vec<u8>)> {
        let mut buf = vec![0u8; self.record_len as usize];
        read_at(&self.file, &mut buf, self.records_offset + i * self.record_len)?;
        probes.reads += 1;
        let key_len = 4 * self.schema.arity();
        let coords = buf[..key_len]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok((coords, buf[key_len..].to_vec()))
    }

    pub fn point_query(&self, coords: &[u32]) -> Result<Option<Vec<u8>>> {
        self.point_query_probed(coords, &mut Probes::default())
    }

    /// Binary search over the sorted keys; each comparison reads one record.
    pub fn point_query_probed(&self, coords: &[u32], probes: &mut Probes) -> Result<Option<Vec<u8>>> {
        // validates arity and ranges
        self.schema.linearize(coords)?;
        let (mut lo, mut hi) = (0u64, self.record_count);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let (key, payload) = self.record(mid, probes)?;
            probes.header_steps += 1;
            match key.as_slice().cmp(coords) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Ok(Some(payload)),
            }
        }
        Ok(None)
    }
}
