//! Byte-aligned element widths and the fixed-width integer vectors built on them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Storage width of one header element. Only byte-aligned widths are
/// supported; there is no sub-byte packing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Width {
    W8,
    W16,
    W32,
    W64,
}

impl Width {
    pub const ALL: [Width; 4] = [Width::W8, Width::W16, Width::W32, Width::W64];
    /// Candidate widths for the DSC difference sequence.
    pub const DIFFERENCE: [Width; 3] = [Width::W8, Width::W16, Width::W32];

    pub const fn bits(self) -> u32 {
        match self {
            Width::W8 => 8,
            Width::W16 => 16,
            Width::W32 => 32,
            Width::W64 => 64,
        }
    }

    pub const fn bytes(self) -> usize {
        self.bits() as usize / 8
    }

    /// Largest value representable, `2^bits - 1`.
    pub const fn max_value(self) -> u64 {
        match self {
            Width::W64 => u64::MAX,
            w => (1u64 << w.bits()) - 1,
        }
    }

    pub const fn holds(self, value: u64) -> bool {
        value <= self.max_value()
    }

    /// Smallest width that can store `value`.
    pub fn smallest_holding(value: u64) -> Width {
        Width::ALL
            .into_iter()
            .find(|w| w.holds(value))
            .unwrap_or(Width::W64)
    }

    pub fn from_bits(bits: u32) -> Result<Width> {
        match bits {
            8 => Ok(Width::W8),
            16 => Ok(Width::W16),
            32 => Ok(Width::W32),
            64 => Ok(Width::W64),
            other => Err(Error::InvalidParameter(format!(
                "unsupported width {other}; expected one of 8, 16, 32, 64"
            ))),
        }
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

impl FromStr for Width {
    type Err = Error;

    fn from_str(s: &str) -> Result<Width> {
        let bits: u32 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad width {s:?}")))?;
        Width::from_bits(bits)
    }
}

/// A vector of unsigned integers stored at one fixed [`Width`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UintVec {
    U8(Vec<u8>),
    U16(Vec<u16>),
    U32(Vec<u32>),
    U64(Vec<u64>),
}

impl UintVec {
    pub fn with_capacity(width: Width, capacity: usize) -> UintVec {
        match width {
            Width::W8 => UintVec::U8(Vec::with_capacity(capacity)),
            Width::W16 => UintVec::U16(Vec::with_capacity(capacity)),
            Width::W32 => UintVec::U32(Vec::with_capacity(capacity)),
            Width::W64 => UintVec::U64(Vec::with_capacity(capacity)),
        }
    }

    /// Packs `values` at `width`, failing on the first value that does not fit.
    pub fn from_values<I>(width: Width, values: I) -> Result<UintVec>
    where
        I: IntoIterator<Item = u64>,
    {
        let iter = values.into_iter();
        let mut out = UintVec::with_capacity(width, iter.size_hint().0);
        for v in iter {
            out.push(v)?;
        }
        Ok(out)
    }

    pub fn width(&self) -> Width {
        match self {
            UintVec::U8(_) => Width::W8,
            UintVec::U16(_) => Width::W16,
            UintVec::U32(_) => Width::W32,
            UintVec::U64(_) => Width::W64,
        }
    }

    pub fn push(&mut self, value: u64) -> Result<()> {
        let width = self.width();
        if !width.holds(value) {
            return Err(Error::WidthOverflow {
                value,
                bits: width.bits(),
            });
        }
        match self {
            UintVec::U8(v) => v.push(value as u8),
            UintVec::U16(v) => v.push(value as u16),
            UintVec::U32(v) => v.push(value as u32),
            UintVec::U64(v) => v.push(value),
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        match self {
            UintVec::U8(v) => v.len(),
            UintVec::U16(v) => v.len(),
            UintVec::U32(v) => v.len(),
            UintVec::U64(v) => v.len(),
        }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Element `i`. Panics when out of bounds, like slice indexing.
    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        match self {
            UintVec::U8(v) => v[i] as u64,
            UintVec::U16(v) => v[i] as u64,
            UintVec::U32(v) => v[i] as u64,
            UintVec::U64(v) => v[i],
        }
    }

    pub fn get_checked(&self, i: usize) -> Option<u64> {
        (i < self.len()).then(|| self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn size_bits(&self) -> u64 {
        self.len() as u64 * self.width().bits() as u64
    }

    /// Appends the little-endian encoding of every element.
    pub fn write_le(&self, out: &mut Vec<u8>) {
        match self {
            UintVec::U8(v) => out.extend_from_slice(v),
            UintVec::U16(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            UintVec::U32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            UintVec::U64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
    }

    /// Decodes `len` little-endian elements of `width` from the front of `bytes`.
    pub fn read_le(width: Width, len: usize, bytes: &[u8]) -> Result<UintVec> {
        let need = len
            .checked_mul(width.bytes())
            .ok_or_else(|| Error::Corruption("element count overflows".into()))?;
        if bytes.len() < need {
            return Err(Error::Corruption(format!(
                "need {need} bytes for {len} x {width}-bit elements, have {}",
                bytes.len()
            )));
        }
        let bytes = &bytes[..need];
        Ok(match width {
            Width::W8 => UintVec::U8(bytes.to_vec()),
            Width::W16 => UintVec::U16(
                bytes
                    .chunks_exact(2)
                    .map(|c| u16::from_le_bytes([c[0], c[1]]))
                    .collect(),
            ),
            Width::W32 => UintVec::U32(
                bytes
                    .chunks_exact(4)
                    .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
            Width::W64 => UintVec::U64(
                bytes
                    .chunks_exact(8)
                    .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
        })
    }
}

/// Index of the first element in `0..len` for which `is_before` is false,
/// assuming `is_before` is true on a prefix. Every evaluation of the
/// predicate is counted in `steps`.
#[inline]
pub(crate) fn lower_bound(len: usize, steps: &mut u64, mut is_before: impl FnMut(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0usize, len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        *steps += 1;
        if is_before(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_width() {
        assert_eq!(Width::smallest_holding(0), Width::W8);
        assert_eq!(Width::smallest_holding(255), Width::W8);
        assert_eq!(Width::smallest_holding(256), Width::W16);
        assert_eq!(Width::smallest_holding(65_536), Width::W32);
        assert_eq!(Width::smallest_holding(u32::MAX as u64 + 1), Width::W64);
        assert_eq!(Width::smallest_holding(u64::MAX), Width::W64);
    }

    #[test]
    fn push_rejects_overflow() {
        let mut v = UintVec::with_capacity(Width::W8, 2);
        v.push(255).unwrap();
        assert!(matches!(
            v.push(256),
            Err(Error::WidthOverflow { value: 256, bits: 8 })
        ));
    }

    #[test]
    fn le_round_trip_all_widths() {
        for w in Width::ALL {
            let vals = [0, 1, w.max_value() / 3, w.max_value()];
            let v = UintVec::from_values(w, vals).unwrap();
            let mut buf = Vec::new();
            v.write_le(&mut buf);
            assert_eq!(buf.len() * 8, v.size_bits() as usize);
            assert_eq!(UintVec::read_le(w, 4, &buf).unwrap(), v);
            assert!(UintVec::read_le(w, 5, &buf).is_err());
        }
    }

    #[test]
    fn lower_bound_matches_partition_point() {
        let xs = [1u64, 3, 3, 7, 9];
        for probe in 0..11 {
            let mut steps = 0;
            let got = lower_bound(xs.len(), &mut steps, |i| xs[i] < probe);
            assert_eq!(got, xs.partition_point(|&x| x < probe));
            assert!(steps <= 3);
        }
    }
}
