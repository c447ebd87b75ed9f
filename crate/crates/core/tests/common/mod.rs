//! Randomized instances shared by the integration suites.

#![allow(dead_code)]

use mdhc_core::codec::{BocHeader, DscHeader, Header, LpcHeader, SchcHeader, DEFAULT_STRIDE};
use mdhc_core::tuner::min_offset_width;
use mdhc_core::workload::{generate_positions, Profile, WorkloadSpec};
use mdhc_core::{oracle_lookup, LogicalPositionSeq, PositionHeader, Width};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PROFILES: [Profile; 3] = [Profile::Singleton, Profile::LongRun, Profile::Uniform];

#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: WorkloadSpec,
    pub space: u64,
    pub seq: LogicalPositionSeq,
}

/// Cardinalities whose product is close to `2^bits`, one dimension per
/// at most 31 bits, none a power of two unless forced.
fn dims_for(bits: u32, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let min_arity = bits.div_ceil(31).max(1);
    let arity = rng.random_range(min_arity..=3.max(min_arity));
    let mut dims = Vec::new();
    let mut left = bits;
    for i in 0..arity {
        let b = (left / (arity - i)).max(1);
        left -= b.min(left);
        let hi = 1u64 << b;
        dims.push(rng.random_range(hi / 2 + 1..=hi) as u32);
    }
    dims
}

/// Instance `i` of a randomized suite: profile cycles with `i`; the logical
/// space spans 2^7 to 2^63 cells and `N` is log-uniform up to `max_n`.
pub fn instance(i: u64, seed: u64, max_n: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let profile = PROFILES[(i % 3) as usize];
    loop {
        let bits = rng.random_range(7..=63);
        let dims = dims_for(bits, &mut rng);
        let space: u64 = dims.iter().map(|&d| d as u64).product();
        let target = max_n.powf(rng.random::<f64>()).max(1.0);
        let cap = if profile == Profile::Singleton { 0.5 } else { 1.0 };
        let density = (target / space as f64).clamp(1e-18, cap);
        let spec = WorkloadSpec {
            min_run: rng.random_range(1..=24),
            payload_len: 0,
            ..WorkloadSpec::new(profile, dims, density, rng.random())
        };
        let seq = generate_positions(&spec).expect("feasible spec");
        if !seq.is_empty() && seq.len() as f64 <= max_n * 1.2 {
            return Instance { spec, space, seq };
        }
    }
}

/// Present positions, their absent neighbours, the space boundaries and
/// some uniformly random positions.
pub fn queries(seq: &LogicalPositionSeq, space: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let xs = seq.as_slice();
    let mut q = Vec::with_capacity(3 * xs.len() + 300);
    for &l in xs {
        q.push(l);
        if l > 0 {
            q.push(l - 1);
        }
        if l + 1 < space {
            q.push(l + 1);
        }
    }
    q.extend([0, space - 1]);
    q.extend((0..256).map(|_| rng.random_range(0..space)));
    q
}

/// Every buildable header over `seq`: each `ι` holding the last position,
/// each difference width, and BOC for a few bucket lengths at the minimal
/// and the widest offset width.
pub fn headers(seq: &LogicalPositionSeq, rng: &mut ChaCha8Rng) -> Vec<Header> {
    let last = seq.last().unwrap();
    let mut out = Vec::new();
    let ls = [1u32, 2, 3, 7, 16, 64, 256];
    for iota in Width::ALL.into_iter().filter(|w| w.holds(last)) {
        out.push(Header::Schc(SchcHeader::build(seq, iota).unwrap()));
        out.push(Header::Lpc(LpcHeader::build(seq, iota).unwrap()));
        for s in Width::DIFFERENCE {
            out.push(Header::Dsc(DscHeader::build(seq, s, iota, DEFAULT_STRIDE).unwrap()));
        }
        for _ in 0..2 {
            let l = ls[rng.random_range(0..ls.len())];
            let min = min_offset_width(seq, l).unwrap();
            for theta in [min, Width::W64] {
                out.push(Header::Boc(BocHeader::build(seq, l, theta, iota).unwrap()));
            }
        }
    }
    out
}

/// Rough header steps per lookup: DSC walks half an accelerator stride of
/// jumps' worth of differences on average; the others binary search.
pub fn lookup_cost(header: &Header, n: usize) -> f64 {
    let log = (n as f64).log2().max(1.0);
    match header {
        Header::Dsc(h) => log + h.stride() as f64 * n as f64 / (2.0 * h.jump_count() as f64),
        _ => log,
    }
}

/// Outcome of checking one header against the oracle.
pub struct Check {
    pub mismatch: Option<String>,
    /// False when the sweep was cut down to a random subset to fit `budget`.
    pub full: bool,
}

/// Like [`oracle_mismatch`], but when the full sweep would exceed `budget`
/// header steps, checks the first and last 64 of each list plus a uniform
/// random subset.
pub fn check_budgeted(
    header: &Header,
    seq: &LogicalPositionSeq,
    queries: &[u64],
    budget: f64,
    rng: &mut ChaCha8Rng,
) -> Check {
    let n = seq.len();
    let cost = lookup_cost(header, n);
    let total = queries.len() + n;
    if cost * total as f64 <= budget {
        return Check {
            mismatch: oracle_mismatch(header, seq, queries),
            full: true,
        };
    }
    let keep = ((budget / cost) as usize).max(256);
    let pick = |len: usize, k: usize, rng: &mut ChaCha8Rng| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..len.min(64)).chain(len.saturating_sub(64)..len).collect();
        idx.extend(rand::seq::index::sample(rng, len, k.min(len)));
        idx.sort_unstable();
        idx.dedup();
        idx
    };
    let q: Vec<u64> = pick(queries.len(), keep / 2, rng).into_iter().map(|i| queries[i]).collect();
    let ps = pick(n, keep / 2, rng);
    Check {
        mismatch: physical_mismatch(header, seq, &q).or_else(|| logical_mismatch(header, seq, ps)),
        full: false,
    }
}

/// First disagreement between `header` and the oracle, if any.
pub fn oracle_mismatch(header: &Header, seq: &LogicalPositionSeq, queries: &[u64]) -> Option<String> {
    physical_mismatch(header, seq, queries).or_else(|| logical_mismatch(header, seq, 0..seq.len()))
}

fn physical_mismatch(header: &Header, seq: &LogicalPositionSeq, queries: &[u64]) -> Option<String> {
    for &l in queries {
        let want = oracle_lookup(seq, l);
        let got = header.physical(l);
        if got != want {
            return Some(format!("{:?} physical({l}) = {got:?}, oracle {want:?}", header.method()));
        }
    }
    None
}

fn logical_mismatch(
    header: &Header,
    seq: &LogicalPositionSeq,
    ps: impl IntoIterator<Item = usize>,
) -> Option<String> {
    for p in ps {
        let l = seq.as_slice()[p];
        match header.logical(p as u64) {
            Ok(got) if got == l => {}
            other => return Some(format!("{:?} logical({p}) = {other:?}, oracle {l}", header.method())),
        }
    }
    if header.logical(seq.len() as u64).is_ok() {
        return Some(format!("{:?} logical(N) did not fail", header.method()));
    }
    None
}
