use crate::codec::{check_fits, check_nonempty, check_physical, PositionHeader, Probes};
use crate::error::{Error, Result};
use crate::relation::LogicalPositionSeq;
use crate::width::{lower_bound, UintVec, Width};

/// Base-offset header. Positions are split into buckets of `l` elements;
/// the first position of each bucket is stored at full width as a base and
/// every position is stored as a narrow offset from its bucket's base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BocHeader {
    bases: UintVec,
    offsets: UintVec,
    l: u32,
}

/// `⌊(N - 1) / l⌋ + 1`, the number of buckets over `n > 0` elements.
pub(crate) fn base_count(n: u64, l: u32) -> u64 {
    if n == 0 {
        0
    } else {
        (n - 1) / l as u64 + 1
    }
}

impl BocHeader {
    pub fn build(seq: &LogicalPositionSeq, l: u32, theta: Width, iota: Width) -> Result<BocHeader> {
        if l == 0 {
            return Err(Error::InvalidParameter("bucket length l must be >= 1".into()));
        }
        check_nonempty(seq)?;
        check_fits(seq, iota)?;
        let xs = seq.as_slice();
        let bases = UintVec::from_values(iota, xs.iter().step_by(l as usize).copied())?;
        let mut offsets = UintVec::with_capacity(theta, xs.len());
        for (j, &x) in xs.iter().enumerate() {
            let offset = x - bases.get(j / l as usize);
            offsets.push(offset).map_err(|_| Error::OffsetOverflow {
                offset,
                index: j,
                bits: theta.bits(),
            })?;
        }
        Ok(BocHeader { bases, offsets, l })
    }

    pub(crate) fn from_parts(bases: UintVec, offsets: UintVec, l: u32) -> Result<BocHeader> {
        if offsets.is_empty() || base_count(offsets.len() as u64, l) != bases.len() as u64 {
            return Err(Error::Corruption("BOC base/offset counts disagree".into()));
        }
        let h = BocHeader { bases, offsets, l };
        let mut prev = None;
        for j in 0..h.offsets.len() {
            if j % l as usize == 0 && h.offsets.get(j) != 0 {
                return Err(Error::Corruption(format!("BOC bucket start {j} has nonzero offset")));
            }
            let x = h
                .bases
                .get(j / l as usize)
                .checked_add(h.offsets.get(j))
                .ok_or_else(|| Error::Corruption("BOC position overflows".into()))?;
            if prev.is_some_and(|p| p >= x) {
                return Err(Error::Corruption("BOC positions not increasing".into()));
            }
            prev = Some(x);
        }
        Ok(h)
    }

    pub fn iota(&self) -> Width {
        self.bases.width()
    }

    pub fn theta(&self) -> Width {
        self.offsets.width()
    }

    pub fn bucket_len(&self) -> u32 {
        self.l
    }

    pub fn base_count(&self) -> u64 {
        self.bases.len() as u64
    }

    pub fn bases(&self) -> &UintVec {
        &self.bases
    }

    pub fn offsets(&self) -> &UintVec {
        &self.offsets
    }
}

impl PositionHeader for BocHeader {
    fn len(&self) -> u64 {
        self.offsets.len() as u64
    }

    fn size_bits(&self) -> u64 {
        self.bases.size_bits() + self.offsets.size_bits()
    }

    fn physical_probed(&self, position: u64, probes: &mut Probes) -> Option<u64> {
        // bucket whose base is the greatest one <= position
        let after = lower_bound(self.bases.len(), &mut probes.header_steps, |k| {
            self.bases.get(k) <= position
        });
        let k = after.checked_sub(1)?;
        let base = self.bases.get(k);
        let target = position - base;
        let l = self.l as usize;
        let start = k * l;
        let end = (start + l).min(self.offsets.len());
        let j = start
            + lower_bound(end - start, &mut probes.header_steps, |i| {
                self.offsets.get(start + i) < target
            });
        (j < end && self.offsets.get(j) == target).then_some(j as u64)
    }

    fn logical_probed(&self, physical: u64, probes: &mut Probes) -> Result<u64> {
        let p = check_physical(physical, self.len())?;
        probes.header_steps += 2;
        Ok(self.bases.get(p / self.l as usize) + self.offsets.get(p))
    }
}
