use crate::codec::{check_fits, check_nonempty, check_physical, PositionHeader, Probes};
use crate::error::{Error, Result};
use crate::relation::LogicalPositionSeq;
use crate::width::{lower_bound, UintVec, Width};

/// Default accelerator stride: one stored pointer per 16 jumps.
pub const DEFAULT_STRIDE: u16 = 16;

/// Accelerator elements are 32-bit difference-sequence indexes.
pub const ACCELERATOR_BITS: u32 = 32;

/// Difference sequence header.
///
/// `difference[i]` holds the gap `L_i - L_{i-1}` when it fits in `s` bits
/// and zero otherwise; `difference[0]` is always zero. Each zero marks a
/// jump: the full-width position stored in `jumps`, in order. The
/// accelerator maps every `n`-th jump to the index of its zero and is
/// rebuilt in memory, never persisted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DscHeader {
    difference: UintVec,
    jumps: UintVec,
    accelerator: Vec<u32>,
    stride: u16,
}

/// Indexes of the 0th, n-th, 2n-th, ... zero elements of `difference`.
pub fn build_accelerator(difference: &UintVec, stride: u16) -> Vec<u32> {
    let n = stride.max(1) as usize;
    (0..difference.len())
        .filter(|&i| difference.get(i) == 0)
        .step_by(n)
        .map(|i| i as u32)
        .collect()
}

impl DscHeader {
    pub fn build(seq: &LogicalPositionSeq, s: Width, iota: Width, stride: u16) -> Result<DscHeader> {
        if s == Width::W64 {
            return Err(Error::InvalidParameter(
                "difference width must be 8, 16 or 32 bits".into(),
            ));
        }
        if stride == 0 {
            return Err(Error::InvalidParameter("accelerator stride n must be >= 1".into()));
        }
        check_nonempty(seq)?;
        check_fits(seq, iota)?;
        check_index_range(seq.len())?;
        let xs = seq.as_slice();
        let mut difference = UintVec::with_capacity(s, xs.len());
        let mut jumps = UintVec::with_capacity(iota, 1);
        difference.push(0)?;
        jumps.push(xs[0])?;
        for w in xs.windows(2) {
            let gap = w[1] - w[0];
            if s.holds(gap) {
                difference.push(gap)?;
            } else {
                difference.push(0)?;
                jumps.push(w[1])?;
            }
        }
        let accelerator = build_accelerator(&difference, stride);
        Ok(DscHeader {
            difference,
            jumps,
            accelerator,
            stride,
        })
    }

    /// Reassembles a loaded header, validating it and rebuilding the accelerator.
    pub(crate) fn from_parts(difference: UintVec, jumps: UintVec, stride: u16) -> Result<DscHeader> {
        if stride == 0 {
            return Err(Error::Format("DSC accelerator stride 0".into()));
        }
        if difference.is_empty() || difference.get(0) != 0 {
            return Err(Error::Corruption("DSC difference sequence must start with 0".into()));
        }
        check_index_range(difference.len())?;
        let mut k = 0usize;
        let mut prev: Option<u64> = None;
        for i in 0..difference.len() {
            let d = difference.get(i);
            let value = if d == 0 {
                let j = jumps.get_checked(k).ok_or_else(|| {
                    Error::Corruption("DSC has more zeros than jumps".into())
                })?;
                k += 1;
                j
            } else {
                prev.unwrap()
                    .checked_add(d)
                    .ok_or_else(|| Error::Corruption("DSC position overflows".into()))?
            };
            if prev.is_some_and(|p| p >= value) {
                return Err(Error::Corruption(format!("DSC positions not increasing at {i}")));
            }
            prev = Some(value);
        }
        if k != jumps.len() {
            return Err(Error::Corruption("DSC has more jumps than zeros".into()));
        }
        let accelerator = build_accelerator(&difference, stride);
        Ok(DscHeader {
            difference,
            jumps,
            accelerator,
            stride,
        })
    }

    pub fn s(&self) -> Width {
        self.difference.width()
    }

    pub fn iota(&self) -> Width {
        self.jumps.width()
    }

    pub fn stride(&self) -> u16 {
        self.stride
    }

    /// Number of jumps, `M`.
    pub fn jump_count(&self) -> u64 {
        self.jumps.len() as u64
    }

    pub fn difference(&self) -> &UintVec {
        &self.difference
    }

    pub fn jumps(&self) -> &UintVec {
        &self.jumps
    }

    pub fn accelerator(&self) -> &[u32] {
        &self.accelerator
    }

    /// In-memory accelerator size in bits.
    pub fn accelerator_bits(&self) -> u64 {
        self.accelerator.len() as u64 * ACCELERATOR_BITS as u64
    }

    /// Rebuilds the full position sequence: each position is its preceding
    /// position plus the difference, or the next jump where the difference is 0.
    pub fn decompress(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.difference.len());
        let mut k = 0;
        let mut current = 0;
        for i in 0..self.difference.len() {
            let d = self.difference.get(i);
            if d == 0 {
                current = self.jumps.get(k);
                k += 1;
            } else {
                current += d;
            }
            out.push(current);
        }
        out
    }
}

fn check_index_range(len: usize) -> Result<()> {
    if len as u64 > u32::MAX as u64 + 1 {
        return Err(Error::InvalidParameter(
            "DSC supports at most 2^32 positions (32-bit accelerator)".into(),
        ));
    }
    Ok(())
}

impl PositionHeader for DscHeader {
    fn len(&self) -> u64 {
        self.difference.len() as u64
    }

    fn size_bits(&self) -> u64 {
        self.difference.size_bits() + self.jumps.size_bits()
    }

    fn physical_probed(&self, position: u64, probes: &mut Probes) -> Option<u64> {
        let n = self.stride as usize;
        let anchors = self.accelerator.len();
        // first anchored jump J_{m·n} >= position
        let m = lower_bound(anchors, &mut probes.header_steps, |a| {
            self.jumps.get(a * n) < position
        });
        if m < anchors && self.jumps.get(m * n) == position {
            return Some(self.accelerator[m] as u64);
        }
        if m == 0 {
            return None;
        }
        let mut k = (m - 1) * n;
        let mut j = self.accelerator[m - 1] as usize;
        let mut decomp = self.jumps.get(k);
        let last = self.difference.len() - 1;
        while decomp < position && j < last {
            j += 1;
            probes.header_steps += 1;
            let d = self.difference.get(j);
            if d == 0 {
                k += 1;
                decomp = self.jumps.get(k);
            } else {
                decomp += d;
            }
        }
        (decomp == position).then_some(j as u64)
    }

    fn logical_probed(&self, physical: u64, probes: &mut Probes) -> Result<u64> {
        let p = check_physical(physical, self.len())?;
        let n = self.stride as usize;
        // accelerator[0] == 0, so some anchor always precedes p
        let m = lower_bound(self.accelerator.len(), &mut probes.header_steps, |a| {
            self.accelerator[a] as usize <= p
        }) - 1;
        let mut k = m * n;
        let mut j = self.accelerator[m] as usize;
        let mut decomp = self.jumps.get(k);
        while j < p {
            j += 1;
            probes.header_steps += 1;
            let d = self.difference.get(j);
            if d == 0 {
                k += 1;
                decomp = self.jumps.get(k);
            } else {
                decomp += d;
            }
        }
        Ok(decomp)
    }
}
