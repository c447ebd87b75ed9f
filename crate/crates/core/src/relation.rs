//! Relation schema, row-major linearization, run detection and the
//! brute-force position oracle.

use std::borrow::Cow;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// One dimension: a name and its ordered, distinct value labels.
/// The ordinal of a label is its position in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionDecl {
    name: String,
    cardinality: u32,
    labels: Labels,
}

/// Numbered labels are the decimal ordinals and are never materialized.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Labels {
    Numbered,
    Explicit {
        values: Vec<String>,
        index: HashMap<String, u32>,
    },
}

impl DimensionDecl {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Result<DimensionDecl> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::Schema(format!("dimension {name:?} has no values")));
        }
        let cardinality = u32::try_from(values.len()).map_err(|_| {
            Error::Schema(format!("dimension {name:?} has more than 2^32 - 1 values"))
        })?;
        let mut index = HashMap::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if index.insert(v.clone(), i as u32).is_some() {
                return Err(Error::Schema(format!(
                    "duplicate label {v:?} in dimension {name:?}"
                )));
            }
        }
        Ok(DimensionDecl {
            name,
            cardinality,
            labels: Labels::Explicit { values, index },
        })
    }

    /// A dimension whose labels are the decimal ordinals `0..cardinality`.
    pub fn numbered(name: impl Into<String>, cardinality: u32) -> Result<DimensionDecl> {
        let name = name.into();
        if cardinality == 0 {
            return Err(Error::Schema(format!("dimension {name:?} has no values")));
        }
        Ok(DimensionDecl {
            name,
            cardinality,
            labels: Labels::Numbered,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Declared labels; `None` for a numbered dimension.
    pub fn explicit_labels(&self) -> Option<&[String]> {
        match &self.labels {
            Labels::Numbered => None,
            Labels::Explicit { values, .. } => Some(values),
        }
    }

    pub fn is_numbered(&self) -> bool {
        self.labels == Labels::Numbered
    }

    pub fn cardinality(&self) -> u64 {
        self.cardinality as u64
    }

    pub fn ordinal(&self, label: &str) -> Option<u32> {
        match &self.labels {
            Labels::Numbered => label
                .parse::<u32>()
                .ok()
                // canonical spelling only, so labels and ordinals stay a bijection
                .filter(|&i| i < self.cardinality && i.to_string() == label),
            Labels::Explicit { index, .. } => index.get(label).copied(),
        }
    }

    pub fn label(&self, ordinal: u32) -> Option<Cow<'_, str>> {
        match &self.labels {
            Labels::Numbered => (ordinal < self.cardinality).then(|| Cow::Owned(ordinal.to_string())),
            Labels::Explicit { values, .. } => values.get(ordinal as usize).map(|v| Cow::Borrowed(v.as_str())),
        }
    }
}

/// Dimensions, per-cell payload length and the derived row-major strides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSchema {
    dimensions: Vec<DimensionDecl>,
    payload_len: u32,
    strides: Vec<u64>,
    cell_count: u64,
}

impl RelationSchema {
    pub fn new(dimensions: Vec<DimensionDecl>, payload_len: u32) -> Result<RelationSchema> {
        if dimensions.is_empty() {
            return Err(Error::Schema("at least one dimension is required".into()));
        }
        if dimensions.len() > u16::MAX as usize {
            return Err(Error::Schema("too many dimensions".into()));
        }
        let mut strides = vec![1u64; dimensions.len()];
        let mut cell_count = 1u64;
        for (k, dim) in dimensions.iter().enumerate().rev() {
            strides[k] = cell_count;
            cell_count = cell_count.checked_mul(dim.cardinality()).ok_or_else(|| {
                Error::Schema("product of cardinalities exceeds 2^64 - 1".into())
            })?;
        }
        Ok(RelationSchema {
            dimensions,
            payload_len,
            strides,
            cell_count,
        })
    }

    /// Schema with numbered labels, named `d0`, `d1`, ...
    pub fn from_cardinalities(cardinalities: &[u32], payload_len: u32) -> Result<RelationSchema> {
        let dims = cardinalities
            .iter()
            .enumerate()
            .map(|(k, &c)| DimensionDecl::numbered(format!("d{k}"), c))
            .collect::<Result<Vec<_>>>()?;
        RelationSchema::new(dims, payload_len)
    }

    pub fn dimensions(&self) -> &[DimensionDecl] {
        &self.dimensions
    }

    pub fn arity(&self) -> usize {
        self.dimensions.len()
    }

    pub fn payload_len(&self) -> u32 {
        self.payload_len
    }

    pub fn strides(&self) -> &[u64] {
        &self.strides
    }

    /// Size of the logical space: the product of all cardinalities.
    pub fn cell_count(&self) -> u64 {
        self.cell_count
    }

    pub fn linearize(&self, coords: &[u32]) -> Result<u64> {
        if coords.len() != self.arity() {
            return Err(Error::SchemaMismatch(format!(
                "expected {} coordinates, got {}",
                self.arity(),
                coords.len()
            )));
        }
        let mut pos = 0u64;
        for ((&c, dim), &stride) in coords.iter().zip(&self.dimensions).zip(&self.strides) {
            if c as u64 >= dim.cardinality() {
                return Err(Error::CoordinateRange(format!(
                    "ordinal {c} >= cardinality {} of dimension {:?}",
                    dim.cardinality(),
                    dim.name()
                )));
            }
            pos += c as u64 * stride;
        }
        Ok(pos)
    }

    pub fn delinearize(&self, position: u64) -> Result<Vec<u32>> {
        if position >= self.cell_count {
            return Err(Error::CoordinateRange(format!(
                "logical position {position} >= cell count {}",
                self.cell_count
            )));
        }
        let mut rest = position;
        Ok(self
            .strides
            .iter()
            .map(|&stride| {
                let c = rest / stride;
                rest %= stride;
                c as u32
            })
            .collect())
    }

    /// Resolves one label per dimension to ordinals.
    pub fn ordinals<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<u32>> {
        if labels.len() != self.arity() {
            return Err(Error::SchemaMismatch(format!(
                "expected {} labels, got {}",
                self.arity(),
                labels.len()
            )));
        }
        labels
            .iter()
            .zip(&self.dimensions)
            .map(|(l, dim)| {
                dim.ordinal(l.as_ref()).ok_or_else(|| {
                    Error::CoordinateRange(format!(
                        "unknown label {:?} in dimension {:?}",
                        l.as_ref(),
                        dim.name()
                    ))
                })
            })
            .collect()
    }
}

/// Strictly increasing logical positions of the nonempty cells.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogicalPositionSeq {
    positions: Vec<u64>,
}

impl LogicalPositionSeq {
    pub fn new(positions: Vec<u64>) -> Result<LogicalPositionSeq> {
        if let Some(i) = positions.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NotIncreasing { index: i + 1 });
        }
        Ok(LogicalPositionSeq { positions })
    }

    /// Like [`LogicalPositionSeq::new`], also requiring every position `< space`.
    pub fn within(positions: Vec<u64>, space: u64) -> Result<LogicalPositionSeq> {
        let seq = LogicalPositionSeq::new(positions)?;
        if let Some(&last) = seq.positions.last() {
            if last >= space {
                return Err(Error::CoordinateRange(format!(
                    "logical position {last} >= cell count {space}"
                )));
            }
        }
        Ok(seq)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn first(&self) -> Option<u64> {
        self.positions.first().copied()
    }

    pub fn last(&self) -> Option<u64> {
        self.positions.last().copied()
    }

    /// `L_j - L_{j-1}` for `j >= 1`.
    pub fn gaps(&self) -> impl Iterator<Item = u64> + '_ {
        self.positions.windows(2).map(|w| w[1] - w[0])
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.positions
    }
}

/// A maximal stretch of consecutive nonempty logical positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub first: u64,
    pub last: u64,
    /// Empty cells at logical positions `<= last`.
    pub empties_before_cumulative: u64,
}

impl Run {
    pub fn len(&self) -> u64 {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn detect_runs(seq: &LogicalPositionSeq) -> Vec<Run> {
    let mut runs = Vec::new();
    let mut iter = seq.as_slice().iter().copied().enumerate();
    let Some((_, mut first)) = iter.next() else {
        return runs;
    };
    let mut last = first;
    for (j, pos) in iter {
        if pos != last + 1 {
            // `j` nonempty cells lie at positions <= last
            runs.push(Run {
                first,
                last,
                empties_before_cumulative: last + 1 - j as u64,
            });
            first = pos;
        }
        last = pos;
    }
    runs.push(Run {
        first,
        last,
        empties_before_cumulative: last + 1 - seq.len() as u64,
    });
    runs
}

/// Ground-truth physical position of `position`, `None` when the cell is empty.
pub fn oracle_lookup(seq: &LogicalPositionSeq, position: u64) -> Option<u64> {
    seq.as_slice()
        .binary_search(&position)
        .ok()
        .map(|j| j as u64)
}

/// A schema plus its nonempty cells in logical order, with payloads packed
/// in the same order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    schema: RelationSchema,
    positions: LogicalPositionSeq,
    payloads: Vec<u8>,
}

impl Relation {
    pub fn new(
        schema: RelationSchema,
        positions: LogicalPositionSeq,
        payloads: Vec<u8>,
    ) -> Result<Relation> {
        let expected = positions.len() as u64 * schema.payload_len() as u64;
        if payloads.len() as u64 != expected {
            return Err(Error::CountMismatch {
                header: positions.len() as u64,
                payloads: if schema.payload_len() == 0 {
                    0
                } else {
                    payloads.len() as u64 / schema.payload_len() as u64
                },
            });
        }
        if let Some(last) = positions.last() {
            if last >= schema.cell_count() {
                return Err(Error::CoordinateRange(format!(
                    "logical position {last} >= cell count {}",
                    schema.cell_count()
                )));
            }
        }
        Ok(Relation {
            schema,
            positions,
            payloads,
        })
    }

    /// Builds a relation from unordered cells. Duplicate coordinates are rejected.
    pub fn from_cells<I>(schema: RelationSchema, cells: I) -> Result<Relation>
    where
        I: IntoIterator<Item = (Vec<u32>, Vec<u8>)>,
    {
        let plen = schema.payload_len() as usize;
        let mut keyed = Vec::new();
        for (coords, payload) in cells {
            if payload.len() != plen {
                return Err(Error::SchemaMismatch(format!(
                    "payload of {} bytes, schema expects {plen}",
                    payload.len()
                )));
            }
            keyed.push((schema.linearize(&coords)?, payload));
        }
        keyed.sort_unstable_by_key(|(l, _)| *l);
        if let Some(w) = keyed.windows(2).find(|w| w[0].0 == w[1].0) {
            let coords = schema.delinearize(w[0].0)?;
            return Err(Error::SchemaMismatch(format!("duplicate cell {coords:?}")));
        }
        let mut payloads = Vec::with_capacity(keyed.len() * plen);
        let mut positions = Vec::with_capacity(keyed.len());
        for (l, p) in keyed {
            positions.push(l);
            payloads.extend_from_slice(&p);
        }
        Relation::new(schema, LogicalPositionSeq::new(positions)?, payloads)
    }

    pub fn schema(&self) -> &RelationSchema {
        &self.schema
    }

    pub fn positions(&self) -> &LogicalPositionSeq {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn payloads(&self) -> &[u8] {
        &self.payloads
    }

    /// Payload of the cell at physical position `p`.
    pub fn payload(&self, p: usize) -> &[u8] {
        let plen = self.schema.payload_len() as usize;
        &self.payloads[p * plen..(p + 1) * plen]
    }

    /// Reference point query through the oracle.
    pub fn lookup(&self, coords: &[u32]) -> Result<Option<&[u8]>> {
        let l = self.schema.linearize(coords)?;
        Ok(oracle_lookup(&self.positions, l).map(|p| self.payload(p as usize)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schema_345() -> RelationSchema {
        RelationSchema::from_cardinalities(&[3, 4, 5], 0).unwrap()
    }

    fn seq(v: &[u64]) -> LogicalPositionSeq {
        LogicalPositionSeq::new(v.to_vec()).unwrap()
    }

    /// Row-major enumeration of every cell, used as the linearization oracle.
    fn enumerate_cells(cards: &[u32]) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for &c in cards {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..c).map(move |i| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn strides_are_row_major() {
        assert_eq!(schema_345().strides(), &[20, 5, 1]);
        assert_eq!(schema_345().cell_count(), 60);
    }

    #[test]
    fn linearize_examples() {
        let s = schema_345();
        assert_eq!(s.linearize(&[0, 0, 0]).unwrap(), 0);
        assert_eq!(s.linearize(&[2, 3, 4]).unwrap(), 59);
        let cells = enumerate_cells(&[3, 4, 5]);
        let idx = cells.iter().position(|c| c == &[1, 2, 3]).unwrap();
        assert_eq!(idx, 33);
        assert_eq!(s.linearize(&[1, 2, 3]).unwrap(), 33);
    }

    #[test]
    fn delinearize_examples() {
        let s = schema_345();
        assert_eq!(s.delinearize(0).unwrap(), vec![0, 0, 0]);
        assert_eq!(s.delinearize(33).unwrap(), vec![1, 2, 3]);
        assert_eq!(s.delinearize(59).unwrap(), vec![2, 3, 4]);
        assert!(matches!(s.delinearize(60), Err(Error::CoordinateRange(_))));
    }

    #[test]
    fn linearize_errors() {
        let s = schema_345();
        assert!(matches!(s.linearize(&[3, 0, 0]), Err(Error::CoordinateRange(_))));
        assert!(matches!(s.linearize(&[0, 0]), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn exhaustive_round_trip_and_monotonicity() {
        for cards in [vec![3, 4, 5], vec![1, 7], vec![2, 1, 3, 2], vec![11]] {
            let s = RelationSchema::from_cardinalities(&cards, 0).unwrap();
            let cells = enumerate_cells(&cards);
            assert_eq!(cells.len() as u64, s.cell_count());
            for (i, c) in cells.iter().enumerate() {
                assert_eq!(s.linearize(c).unwrap(), i as u64);
                assert_eq!(&s.delinearize(i as u64).unwrap(), c);
            }
        }
    }

    #[test]
    fn schema_rejects_overflow_and_duplicates() {
        let big = RelationSchema::from_cardinalities(&[65536, 65536, 65536, 65536], 0);
        assert!(matches!(big, Err(Error::Schema(_))));
        let ok = RelationSchema::from_cardinalities(&[65536, 65536, 65536, 65535], 0);
        assert!(ok.is_ok());
        let dup = DimensionDecl::new("x", vec!["a".into(), "a".into()]);
        assert!(matches!(dup, Err(Error::Schema(_))));
        assert!(DimensionDecl::new("x", vec![]).is_err());
    }

    #[test]
    fn labels_follow_declaration_order() {
        let d = DimensionDecl::new("city", vec!["zurich".into(), "athens".into()]).unwrap();
        assert_eq!(d.ordinal("zurich"), Some(0));
        assert_eq!(d.ordinal("athens"), Some(1));
        assert_eq!(d.label(1).as_deref(), Some("athens"));
    }

    #[test]
    fn runs_examples() {
        assert_eq!(
            detect_runs(&seq(&[2, 3, 4, 10, 11])),
            vec![
                Run { first: 2, last: 4, empties_before_cumulative: 2 },
                Run { first: 10, last: 11, empties_before_cumulative: 7 },
            ]
        );
        let runs = detect_runs(&seq(&[0, 5, 9, 300, 305, 1000]));
        assert_eq!(runs.len(), 6);
        assert!(runs.iter().all(|r| r.first == r.last));
        let v: Vec<u64> = runs.iter().map(|r| r.empties_before_cumulative).collect();
        assert_eq!(v, vec![0, 4, 7, 297, 301, 995]);
        assert_eq!(
            detect_runs(&seq(&[0, 1, 2])),
            vec![Run { first: 0, last: 2, empties_before_cumulative: 0 }]
        );
        assert!(detect_runs(&seq(&[])).is_empty());
    }

    #[test]
    fn oracle_examples() {
        let s = seq(&[0, 5, 9, 300, 305, 1000]);
        assert_eq!(oracle_lookup(&s, 305), Some(4));
        assert_eq!(oracle_lookup(&s, 7), None);
        assert_eq!(oracle_lookup(&seq(&[0]), 0), Some(0));
    }

    #[test]
    fn seq_rejects_unsorted() {
        assert!(matches!(
            LogicalPositionSeq::new(vec![1, 3, 3]),
            Err(Error::NotIncreasing { index: 2 })
        ));
        assert!(LogicalPositionSeq::within(vec![1, 60], 60).is_err());
    }

    #[test]
    fn relation_from_cells_sorts_and_rejects_duplicates() {
        let s = RelationSchema::from_cardinalities(&[3, 4, 5], 1).unwrap();
        let r = Relation::from_cells(
            s.clone(),
            vec![(vec![2, 3, 4], vec![9]), (vec![0, 0, 1], vec![7])],
        )
        .unwrap();
        assert_eq!(r.positions().as_slice(), &[1, 59]);
        assert_eq!(r.payloads(), &[7, 9]);
        assert_eq!(r.lookup(&[2, 3, 4]).unwrap(), Some(&[9u8][..]));
        assert_eq!(r.lookup(&[2, 3, 3]).unwrap(), None);
        let dup = Relation::from_cells(s, vec![(vec![0, 0, 1], vec![1]), (vec![0, 0, 1], vec![2])]);
        assert!(dup.is_err());
    }

    proptest! {
        #[test]
        fn runs_partition_sequence(mut raw in proptest::collection::btree_set(0u64..500, 0..80)) {
            let positions: Vec<u64> = std::mem::take(&mut raw).into_iter().collect();
            let s = seq(&positions);
            let runs = detect_runs(&s);
            let rebuilt: Vec<u64> = runs.iter().flat_map(|r| r.first..=r.last).collect();
            prop_assert_eq!(&rebuilt, &positions);
            for (k, r) in runs.iter().enumerate() {
                let nonempty_through = positions.iter().filter(|&&p| p <= r.last).count() as u64;
                prop_assert_eq!(r.empties_before_cumulative, r.last + 1 - nonempty_through);
                if k > 0 {
                    let prev = runs[k - 1];
                    prop_assert!(r.first > prev.last + 1);
                    prop_assert_eq!(
                        r.empties_before_cumulative - prev.empties_before_cumulative,
                        r.first - prev.last - 1
                    );
                }
            }
        }
    }
}
