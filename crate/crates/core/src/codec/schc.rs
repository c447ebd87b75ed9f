use crate::codec::{check_fits, check_nonempty, check_physical, PositionHeader, Probes};
use crate::error::{Error, Result};
use crate::relation::{detect_runs, LogicalPositionSeq};
use crate::width::{lower_bound, UintVec, Width};

/// Single count header: one `(L_j, V_j)` pair per run, where `L_j` is the
/// last logical position of the run and `V_j` the number of empty cells at
/// positions `<= L_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchcHeader {
    lasts: UintVec,
    empties: UintVec,
    len: u64,
}

impl SchcHeader {
    pub fn build(seq: &LogicalPositionSeq, iota: Width) -> Result<SchcHeader> {
        check_nonempty(seq)?;
        check_fits(seq, iota)?;
        let runs = detect_runs(seq);
        let lasts = UintVec::from_values(iota, runs.iter().map(|r| r.last))?;
        let empties = UintVec::from_values(iota, runs.iter().map(|r| r.empties_before_cumulative))?;
        Ok(SchcHeader {
            lasts,
            empties,
            len: seq.len() as u64,
        })
    }

    pub(crate) fn read_payload(iota: Width, runs: usize, bytes: &[u8]) -> Result<SchcHeader> {
        if runs == 0 {
            return Err(Error::Format("SCHC header with no runs".into()));
        }
        let pairs = UintVec::read_le(iota, 2 * runs, bytes)?;
        let lasts = UintVec::from_values(iota, (0..runs).map(|j| pairs.get(2 * j)))?;
        let empties = UintVec::from_values(iota, (0..runs).map(|j| pairs.get(2 * j + 1)))?;
        for j in 0..runs {
            let (l, v) = (lasts.get(j), empties.get(j));
            let bad = v > l
                || (j > 0 && (l <= lasts.get(j - 1) || v <= empties.get(j - 1)))
                || (j > 0 && l - v <= lasts.get(j - 1) - empties.get(j - 1));
            if bad {
                return Err(Error::Corruption(format!("inconsistent SCHC pair {j}")));
            }
        }
        let len = lasts.get(runs - 1) - empties.get(runs - 1) + 1;
        Ok(SchcHeader {
            lasts,
            empties,
            len,
        })
    }

    /// Pairs interleaved as `L_0, V_0, L_1, V_1, ...`.
    pub(crate) fn write_payload(&self, out: &mut Vec<u8>) {
        let mut pairs = UintVec::with_capacity(self.iota(), 2 * self.lasts.len());
        for (l, v) in self.pairs() {
            pairs.push(l).expect("built at this width");
            pairs.push(v).expect("built at this width");
        }
        pairs.write_le(out);
    }

    pub fn iota(&self) -> Width {
        self.lasts.width()
    }

    /// Number of runs, `ν`.
    pub fn run_count(&self) -> u64 {
        self.lasts.len() as u64
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.lasts.iter().zip(self.empties.iter())
    }
}

impl PositionHeader for SchcHeader {
    fn len(&self) -> u64 {
        self.len
    }

    fn size_bits(&self) -> u64 {
        self.lasts.size_bits() + self.empties.size_bits()
    }

    fn physical_probed(&self, position: u64, probes: &mut Probes) -> Option<u64> {
        let runs = self.lasts.len();
        let j = lower_bound(runs, &mut probes.header_steps, |i| self.lasts.get(i) < position);
        if j == runs {
            return None;
        }
        let v = self.empties.get(j);
        // The run ends at L_j and starts right after L_{j-1} + (V_j - V_{j-1}),
        // with a virtual predecessor (-1, 0) for the first run.
        let starts_after_or_at = if j == 0 {
            v <= position
        } else {
            self.lasts.get(j - 1) + (v - self.empties.get(j - 1)) < position
        };
        starts_after_or_at.then(|| position - v)
    }

    fn logical_probed(&self, physical: u64, probes: &mut Probes) -> Result<u64> {
        check_physical(physical, self.len)?;
        // L_j - V_j is the physical position of the last cell of run j.
        let j = lower_bound(self.lasts.len(), &mut probes.header_steps, |i| {
            self.lasts.get(i) - self.empties.get(i) < physical
        });
        Ok(physical + self.empties.get(j))
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
        let h = SchcHeader::build(&seq(&[2, 3, 4, 10, 11]), Width::W32).unwrap();
        assert_eq!(h.pairs().collect::<Vec<_>>(), vec![(4, 2), (11, 7)]);
        let h = SchcHeader::build(&seq(&[0, 5, 9, 300, 305, 1000]), Width::W32).unwrap();
        assert_eq!(h.run_count(), 6);
        let v: Vec<u64> = h.pairs().map(|p| p.1).collect();
        assert_eq!(v, vec![0, 4, 7, 297, 301, 995]);
        assert_eq!(h.size_bits(), 2 * 6 * 32);
        let h = SchcHeader::build(&seq(&[0, 1, 2]), Width::W8).unwrap();
        assert_eq!(h.pairs().collect::<Vec<_>>(), vec![(2, 0)]);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(
            SchcHeader::build(&seq(&[1, 256]), Width::W8),
            Err(Error::WidthOverflow { value: 256, bits: 8 })
        ));
        assert!(matches!(
            SchcHeader::build(&seq(&[]), Width::W8),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn physical_examples() {
        let h = SchcHeader::build(&seq(&[2, 3, 4, 10, 11]), Width::W32).unwrap();
        assert_eq!(h.physical(10), Some(3));
        assert_eq!(h.physical(5), None);
        assert_eq!(h.physical(0), None);
        assert_eq!(h.physical(2), Some(0));
        assert_eq!(h.physical(12), None);
    }

    #[test]
    fn logical_examples() {
        let h = SchcHeader::build(&seq(&[2, 3, 4, 10, 11]), Width::W32).unwrap();
        assert_eq!(h.logical(3).unwrap(), 10);
        assert_eq!(h.logical(4).unwrap(), 11);
        assert!(matches!(h.logical(5), Err(Error::PhysicalRange { .. })));
        let h = SchcHeader::build(&seq(&[0, 1, 2]), Width::W8).unwrap();
        assert_eq!(h.logical(0).unwrap(), 0);
    }

    #[test]
    fn worst_case_is_two_n_iota() {
        let h = SchcHeader::build(&seq(&[1, 3, 5, 7]), Width::W16).unwrap();
        assert_eq!(h.run_count(), 4);
        assert_eq!(h.size_bits(), 2 * 4 * 16);
    }
}
