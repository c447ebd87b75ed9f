//! Exact header size models, the empirical gap distribution and the width
//! selection rules built on it.
//!
//! All jump counts here are exact: `M = 1 + |{i >= 1 : ΔL_i >= 2^s}|`,
//! counting the mandatory first jump. The textbook model `(1 - F(2^s))·N`
//! is available separately as [`modeled_jumps`] for reporting.

use serde::Serialize;

use crate::codec::{Header, HeaderCounts, HeaderParams, PositionHeader};
use crate::error::{Error, Result};
use crate::relation::LogicalPositionSeq;
use crate::width::Width;

pub use crate::codec::Method;

/// Closed-form header size in bits.
///
/// * SCHC: `2·ν·ι`
/// * LPC: `N·ι`
/// * BOC: `(⌊(N-1)/l⌋ + 1)·ι + N·θ`
/// * DSC: `M·ι + N·s`
pub fn model_size_bits(method: Method, params: &HeaderParams, counts: &HeaderCounts) -> Result<u64> {
    let iota = params.iota.bits() as u64;
    let n = counts.n;
    Ok(match method {
        Method::Schc => {
            if counts.nu > n {
                return Err(Error::InvalidParameter(format!(
                    "run count {} exceeds N = {n}",
                    counts.nu
                )));
            }
            2 * counts.nu * iota
        }
        Method::Lpc => n * iota,
        Method::Boc => {
            let l = params
                .l
                .filter(|&l| l > 0)
                .ok_or_else(|| Error::InvalidParameter("BOC needs l >= 1".into()))?;
            let theta = params
                .theta
                .ok_or_else(|| Error::InvalidParameter("BOC needs theta".into()))?;
            let bases = if n == 0 { 0 } else { (n - 1) / l as u64 + 1 };
            bases * iota + n * theta.bits() as u64
        }
        Method::Dsc => {
            let s = params
                .s
                .ok_or_else(|| Error::InvalidParameter("DSC needs s".into()))?;
            if n > 0 && (counts.m == 0 || counts.m > n) {
                return Err(Error::InvalidParameter(format!(
                    "jump count {} inconsistent with N = {n}",
                    counts.m
                )));
            }
            counts.m * iota + n * s.bits() as u64
        }
    })
}

/// Empirical distribution of the gaps `ΔL_j = L_j - L_{j-1}`, `j >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceDistribution {
    sorted_gaps: Vec<u64>,
}

pub fn empirical_cdf(seq: &LogicalPositionSeq) -> Result<DifferenceDistribution> {
    if seq.len() < 2 {
        return Err(Error::DegenerateDistribution(seq.len()));
    }
    let mut sorted_gaps: Vec<u64> = seq.gaps().collect();
    sorted_gaps.sort_unstable();
    Ok(DifferenceDistribution { sorted_gaps })
}

impl DifferenceDistribution {
    /// Number of gaps, `N - 1`.
    pub fn gap_count(&self) -> usize {
        self.sorted_gaps.len()
    }

    /// Number of positions the gaps were taken from.
    pub fn positions(&self) -> u64 {
        self.sorted_gaps.len() as u64 + 1
    }

    pub fn min_gap(&self) -> u64 {
        self.sorted_gaps[0]
    }

    pub fn max_gap(&self) -> u64 {
        *self.sorted_gaps.last().unwrap()
    }

    /// Gap at quantile `q` in `[0, 1]` (nearest rank).
    pub fn quantile(&self, q: f64) -> u64 {
        let n = self.sorted_gaps.len();
        let rank = ((q.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
        self.sorted_gaps[rank - 1]
    }

    /// `|{j : ΔL_j < x}|`.
    pub fn count_below(&self, x: u128) -> u64 {
        self.sorted_gaps.partition_point(|&g| (g as u128) < x) as u64
    }

    /// `F(x) = P(ΔL_j < x)`.
    pub fn cdf(&self, x: u128) -> f64 {
        self.count_below(x) as f64 / self.sorted_gaps.len() as f64
    }

    /// `F(2^bits)`.
    pub fn cdf_pow2(&self, bits: u32) -> f64 {
        self.cdf(pow2(bits))
    }
}

fn pow2(bits: u32) -> u128 {
    1u128 << bits.min(127)
}

/// Exact DSC jump count for difference width `bits`.
pub fn exact_jumps(dist: &DifferenceDistribution, bits: u32) -> u64 {
    1 + (dist.gap_count() as u64 - dist.count_below(pow2(bits)))
}

/// Jump count predicted for difference width `s`, including the first jump.
pub fn predict_jumps(dist: &DifferenceDistribution, s: Width) -> u64 {
    exact_jumps(dist, s.bits())
}

/// The textbook jump model `(1 - F(2^s))·N`, kept for reports.
pub fn modeled_jumps(dist: &DifferenceDistribution, bits: u32) -> f64 {
    (1.0 - dist.cdf_pow2(bits)) * dist.positions() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthChange {
    Shrink,
    Keep,
}

/// Cost/benefit of narrowing the difference width from `zeta1` to `zeta2` bits.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthVerdict {
    pub verdict: WidthChange,
    pub zeta1: u32,
    pub zeta2: u32,
    pub iota: u32,
    /// `N·(ζ1 - ζ2)`: bits saved in the difference sequence.
    pub benefit: u64,
    /// `(M2 - M1)·ι`: bits added to the jump sequence.
    pub cost: u64,
    pub jumps_wide: u64,
    pub jumps_narrow: u64,
    /// `(F(2^ζ1) - F(2^ζ2)) / (ζ1 - ζ2)`.
    pub slope: f64,
    /// Whether the slope is strictly below `1/ι` (decided in exact arithmetic).
    pub slope_below_inverse_iota: bool,
}

pub fn width_change_verdict(
    dist: &DifferenceDistribution,
    zeta1: u32,
    zeta2: u32,
    iota: u32,
) -> Result<WidthVerdict> {
    if !(zeta1 > zeta2 && zeta2 > 0) {
        return Err(Error::InvalidParameter(format!(
            "need zeta1 > zeta2 > 0, got {zeta1} and {zeta2}"
        )));
    }
    if iota == 0 {
        return Err(Error::InvalidParameter("iota must be > 0".into()));
    }
    let n = dist.positions();
    let m1 = exact_jumps(dist, zeta1);
    let m2 = exact_jumps(dist, zeta2);
    let benefit = n * (zeta1 - zeta2) as u64;
    let cost = (m2 - m1) * iota as u64;
    let below1 = dist.count_below(pow2(zeta1));
    let below2 = dist.count_below(pow2(zeta2));
    let slope = (below1 - below2) as f64 / dist.gap_count() as f64 / (zeta1 - zeta2) as f64;
    // slope < 1/ι  <=>  (below1 - below2)·ι < (N - 1)·(ζ1 - ζ2)
    let lhs = (below1 - below2) as u128 * iota as u128;
    let rhs = dist.gap_count() as u128 * (zeta1 - zeta2) as u128;
    let slope_below_inverse_iota = lhs < rhs;
    Ok(WidthVerdict {
        verdict: if benefit > cost {
            WidthChange::Shrink
        } else {
            WidthChange::Keep
        },
        zeta1,
        zeta2,
        iota,
        benefit,
        cost,
        jumps_wide: m1,
        jumps_narrow: m2,
        slope,
        slope_below_inverse_iota,
    })
}

/// Picks the difference width minimizing `M·ι + N·s` among `candidates`,
/// with exact jump counts. Ties go to the narrower width.
pub fn select_dsc_width(
    seq: &LogicalPositionSeq,
    iota: Width,
    candidates: &[Width],
) -> Result<(Width, Vec<SizeReport>)> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut sorted: Vec<Width> = candidates
        .iter()
        .copied()
        .filter(|w| *w != Width::W64)
        .collect();
    sorted.sort();
    sorted.dedup();
    if sorted.is_empty() {
        return Err(Error::InvalidParameter("no difference width candidates".into()));
    }
    let n = seq.len() as u64;
    let mut reports = Vec::with_capacity(sorted.len());
    let mut best: Option<(Width, u64)> = None;
    for s in sorted {
        let m = 1 + seq.gaps().filter(|&g| !s.holds(g)).count() as u64;
        let params = HeaderParams {
            s: Some(s),
            n: Some(crate::codec::DEFAULT_STRIDE),
            ..HeaderParams::new(iota)
        };
        let counts = HeaderCounts {
            n,
            m,
            ..Default::default()
        };
        let bits = model_size_bits(Method::Dsc, &params, &counts)?;
        if best.is_none_or(|(_, b)| bits < b) {
            best = Some((s, bits));
        }
        reports.push(SizeReport {
            method: Method::Dsc,
            params,
            counts,
            model_bits: bits,
            measured_bits: None,
        });
    }
    Ok((best.unwrap().0, reports))
}

/// Smallest width holding every in-bucket offset for bucket length `l`.
pub fn min_offset_width(seq: &LogicalPositionSeq, l: u32) -> Result<Width> {
    if l == 0 {
        return Err(Error::InvalidParameter("bucket length l must be >= 1".into()));
    }
    let max_offset = seq
        .as_slice()
        .chunks(l as usize)
        .map(|bucket| bucket[bucket.len() - 1] - bucket[0])
        .max()
        .ok_or(Error::EmptySequence)?;
    Ok(Width::smallest_holding(max_offset))
}

/// Asymptotic preference between LPC and BOC: BOC iff `ι/l + θ < ι`.
pub fn lpc_vs_boc(iota: u32, l: u32, theta: u32) -> Method {
    // ι/l + θ < ι  <=>  ι + θ·l < ι·l   (l >= 1)
    let (iota, l, theta) = (iota as u64, l as u64, theta as u64);
    if l > 0 && iota + theta * l < iota * l {
        Method::Boc
    } else {
        Method::Lpc
    }
}

/// Accelerator size over jump sequence size, `(⌊(M-1)/n⌋ + 1)·α / (M·ι)`.
pub fn accel_overhead_ratio(m: u64, n: u64, alpha: u32, iota: u32) -> f64 {
    if m == 0 || n == 0 || iota == 0 {
        return 0.0;
    }
    (((m - 1) / n + 1) * alpha as u64) as f64 / (m as f64 * iota as f64)
}

/// Limit of [`accel_overhead_ratio`] as `M` grows: `α / (n·ι)`.
pub fn accel_overhead_limit(n: u64, alpha: u32, iota: u32) -> f64 {
    alpha as f64 / (n as f64 * iota as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Theorem1Check {
    pub jumps: u64,
    pub base_count: u64,
    pub holds: bool,
}

/// Builds BOC with `(l, θ)` and DSC with difference width `ζ >= θ` over the
/// same sequence and checks that the jump count does not exceed the base count.
pub fn check_theorem1(seq: &LogicalPositionSeq, l: u32, theta: Width, zeta: Width) -> Result<Theorem1Check> {
    if theta > zeta {
        return Err(Error::InvalidParameter(format!(
            "need theta <= zeta, got {theta} > {zeta}"
        )));
    }
    let iota = Width::smallest_holding(seq.last().ok_or(Error::EmptySequence)?);
    let boc = crate::codec::BocHeader::build(seq, l, theta, iota)?;
    let dsc = crate::codec::DscHeader::build(seq, zeta, iota, crate::codec::DEFAULT_STRIDE)?;
    Ok(Theorem1Check {
        jumps: dsc.jump_count(),
        base_count: boc.base_count(),
        holds: dsc.jump_count() <= boc.base_count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corollary2Check {
    pub dsc_bits: u64,
    pub boc_bits: u64,
    pub holds: bool,
}

/// With difference width equal to the offset width and a shared `ι`, DSC is
/// never larger than BOC.
pub fn check_corollary2(seq: &LogicalPositionSeq, l: u32, theta: Width, iota: Width) -> Result<Corollary2Check> {
    let boc = crate::codec::BocHeader::build(seq, l, theta, iota)?;
    let dsc = crate::codec::DscHeader::build(seq, theta, iota, crate::codec::DEFAULT_STRIDE)?;
    Ok(Corollary2Check {
        dsc_bits: dsc.size_bits(),
        boc_bits: boc.size_bits(),
        holds: dsc.size_bits() <= boc.size_bits(),
    })
}

/// Size of one header configuration: modeled, and measured once serialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeReport {
    pub method: Method,
    pub params: HeaderParams,
    pub counts: HeaderCounts,
    pub model_bits: u64,
    pub measured_bits: Option<u64>,
}

impl SizeReport {
    /// Report for a built header; `measured_bits` comes from its serialized payload.
    pub fn for_header(header: &Header) -> Result<SizeReport> {
        let params = header.params();
        let counts = header.counts();
        let model_bits = model_size_bits(header.method(), &params, &counts)?;
        let mut buf = Vec::new();
        header.write_payload(&mut buf);
        Ok(SizeReport {
            method: header.method(),
            params,
            counts,
            model_bits,
            measured_bits: Some(buf.len() as u64 * 8),
        })
    }

    pub fn row(&self) -> SizeRow {
        let p = &self.params;
        let c = &self.counts;
        SizeRow {
            method: self.method.name(),
            n: c.n,
            nu: (self.method == Method::Schc).then_some(c.nu),
            m: (self.method == Method::Dsc).then_some(c.m),
            iota: p.iota.bits(),
            theta: p.theta.map(Width::bits),
            l: p.l,
            s: p.s.map(Width::bits),
            model_bits: self.model_bits,
            measured_bits: self.measured_bits,
        }
    }
}

/// CSV shape of a [`SizeReport`]: `method,N,nu,M,iota,theta,l,s,model_bits,measured_bits`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeRow {
    pub method: &'static str,
    #[serde(rename = "N")]
    pub n: u64,
    pub nu: Option<u64>,
    #[serde(rename = "M")]
    pub m: Option<u64>,
    pub iota: u32,
    pub theta: Option<u32>,
    pub l: Option<u32>,
    pub s: Option<u32>,
    pub model_bits: u64,
    pub measured_bits: Option<u64>,
}
