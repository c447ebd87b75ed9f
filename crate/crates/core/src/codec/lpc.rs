use crate::codec::{check_fits, check_nonempty, check_physical, PositionHeader, Probes};
use crate::error::{Error, Result};
use crate::relation::LogicalPositionSeq;
use crate::width::{lower_bound, UintVec, Width};

/// Logical position header: every nonempty cell's logical position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpcHeader {
    positions: UintVec,
}

impl LpcHeader {
    pub fn build(seq: &LogicalPositionSeq, iota: Width) -> Result<LpcHeader> {
        check_nonempty(seq)?;
        check_fits(seq, iota)?;
        Ok(LpcHeader {
            positions: UintVec::from_values(iota, seq.as_slice().iter().copied())?,
        })
    }

    pub(crate) fn from_positions(positions: UintVec) -> Result<LpcHeader> {
        if positions.is_empty() {
            return Err(Error::Format("LPC header with no positions".into()));
        }
        if (1..positions.len()).any(|i| positions.get(i - 1) >= positions.get(i)) {
            return Err(Error::Corruption("LPC positions not increasing".into()));
        }
        Ok(LpcHeader { positions })
    }

    pub fn iota(&self) -> Width {
        self.positions.width()
    }

    pub fn positions(&self) -> &UintVec {
        &self.positions
    }
}

impl PositionHeader for LpcHeader {
    fn len(&self) -> u64 {
        self.positions.len() as u64
    }

    fn size_bits(&self) -> u64 {
        self.positions.size_bits()
    }

    fn physical_probed(&self, position: u64, probes: &mut Probes) -> Option<u64> {
        let n = self.positions.len();
        let j = lower_bound(n, &mut probes.header_steps, |i| self.positions.get(i) < position);
        (j < n && self.positions.get(j) == position).then_some(j as u64)
    }

    fn logical_probed(&self, physical: u64, probes: &mut Probes) -> Result<u64> {
        let p = check_physical(physical, self.len())?;
        probes.header_steps += 1;
        Ok(self.positions.get(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u64]) -> LogicalPositionSeq {
        LogicalPositionSeq::new(v.to_vec()).unwrap()
    }

    #[test]
    fn build_examples() {
        let h = LpcHeader::build(&seq(&[0, 5, 9]), Width::W8).unwrap();
        assert_eq!(h.positions().iter().collect::<Vec<_>>(), vec![0, 5, 9]);
        assert_eq!(h.size_bits(), 24);
        let h = LpcHeader::build(&seq(&[0, 5, 9, 300, 305, 1000]), Width::W32).unwrap();
        assert_eq!(h.size_bits(), 192);
        assert!(matches!(
            LpcHeader::build(&seq(&[]), Width::W32),
            Err(Error::EmptySequence)
        ));
        assert!(matches!(
            LpcHeader::build(&seq(&[0, 300]), Width::W8),
            Err(Error::WidthOverflow { .. })
        ));
    }

    #[test]
    fn lookups() {
        let h = LpcHeader::build(&seq(&[0, 5, 9, 300, 305, 1000]), Width::W32).unwrap();
        assert_eq!(h.physical(300), Some(3));
        assert_eq!(h.physical(4), None);
        assert_eq!(h.physical(0), Some(0));
        assert_eq!(h.physical(1001), None);
        assert_eq!(h.logical(0).unwrap(), 0);
        assert_eq!(h.logical(5).unwrap(), 1000);
        assert!(matches!(h.logical(6), Err(Error::PhysicalRange { .. })));
    }
}
