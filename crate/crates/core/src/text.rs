//! Text ingestion formats.
//!
//! Schema file: one line per dimension, `name:label,label,...`, or
//! `name:#count` for a dimension labelled by its ordinals `0..count`.
//! Cells file: one nonempty cell per line, tab separated: one label per
//! dimension, then the payload hex-encoded. Both UTF-8. Blank lines and
//! lines starting with `#` are skipped.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::relation::{DimensionDecl, Relation, RelationSchema};

/// Parses dimension declarations. The payload length is not part of the
/// schema file; it is settled when the cells are read.
pub fn read_dimensions<R: BufRead>(reader: R) -> Result<Vec<DimensionDecl>> {
    let mut dims = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, values) = line.split_once(':').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: "expected `name:label,label,...`".into(),
        })?;
        let decl = match values.strip_prefix('#').map(str::parse::<u32>) {
            Some(Ok(count)) => DimensionDecl::numbered(name, count),
            _ => DimensionDecl::new(name, values.split(',').map(str::to_owned).collect()),
        };
        dims.push(decl.map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    if dims.is_empty() {
        return Err(Error::Schema("schema file declares no dimensions".into()));
    }
    Ok(dims)
}

pub fn write_schema<W: Write>(schema: &RelationSchema, mut out: W) -> Result<()> {
    for dim in schema.dimensions() {
        match dim.explicit_labels() {
            Some(values) => writeln!(out, "{}:{}", dim.name(), values.join(","))?,
            None => writeln!(out, "{}:#{}", dim.name(), dim.cardinality())?,
        }
    }
    Ok(())
}

/// Reads a cells file against `dims`. When `payload_len` is `None` it is
/// taken from the first cell (0 for an empty file).
pub fn read_relation<R: BufRead>(
    dims: Vec<DimensionDecl>,
    payload_len: Option<u32>,
    reader: R,
) -> Result<Relation> {
    let arity = dims.len();
    let mut cells = Vec::new();
    let mut plen = payload_len;
    let probe = RelationSchema::new(dims.clone(), 0)?;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != arity + 1 {
            return Err(parse_err(format!(
                "expected {} tab-separated fields, got {}",
                arity + 1,
                fields.len()
            )));
        }
        let coords = probe
            .ordinals(&fields[..arity])
            .map_err(|e| parse_err(e.to_string()))?;
        let payload = hex::decode(fields[arity]).map_err(|e| parse_err(format!("bad payload hex: {e}")))?;
        let expected = *plen.get_or_insert(payload.len() as u32);
        if payload.len() != expected as usize {
            return Err(parse_err(format!(
                "payload of {} bytes, expected {expected}",
                payload.len()
            )));
        }
        cells.push((coords, payload));
    }
    let schema = RelationSchema::new(dims, plen.unwrap_or(0))?;
    Relation::from_cells(schema, cells)
}

pub fn write_cells<W: Write>(relation: &Relation, mut out: W) -> Result<()> {
    let schema = relation.schema();
    for (p, &l) in relation.positions().as_slice().iter().enumerate() {
        let coords = schema.delinearize(l)?;
        for (c, dim) in coords.iter().zip(schema.dimensions()) {
            out.write_all(dim.label(*c).unwrap_or_default().as_bytes())?;
            out.write_all(b"\t")?;
        }
        writeln!(out, "{}", hex::encode(relation.payload(p)))?;
    }
    Ok(())
}
