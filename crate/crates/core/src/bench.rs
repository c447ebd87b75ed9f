//! Size analysis, tuner reports and the point-query benchmark.
//!
//! Everything here produces plain rows; rendering is CSV with a header row.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codec::{Header, HeaderParams, Method, PositionHeader, Probes};
use crate::error::{Error, Result};
use crate::relation::{LogicalPositionSeq, Relation};
use crate::store::{table_file_len, Store, Table};
use crate::tuner::{
    check_corollary2, empirical_cdf, min_offset_width, model_size_bits, select_dsc_width,
    width_change_verdict, Corollary2Check, SizeReport, WidthChange, WidthVerdict,
};
use crate::width::Width;

/// Bucket lengths tried when BOC's `l` is not fixed.
pub const BOC_L_SWEEP: [u32; 13] = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096];

/// Sample sizes used when none are given.
pub const DEFAULT_SAMPLES: [usize; 5] = [100, 500, 1000, 5000, 10_000];

/// Caller-fixed parameters; anything `None` is tuned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub iota: Option<Width>,
    pub theta: Option<Width>,
    pub l: Option<u32>,
    pub s: Option<Width>,
    pub n: Option<u16>,
}

/// `ι` for `seq`: the override, or the smallest width holding the last position.
pub fn position_width(seq: &LogicalPositionSeq, iota: Option<Width>) -> Result<Width> {
    let last = seq.last().ok_or(Error::EmptySequence)?;
    match iota {
        Some(w) if !w.holds(last) => Err(Error::WidthOverflow {
            value: last,
            bits: w.bits(),
        }),
        Some(w) => Ok(w),
        None => Ok(Width::smallest_holding(last)),
    }
}

/// BOC `(l, θ)` of least modeled size. With `l` fixed only `θ` is chosen.
pub fn tune_boc(seq: &LogicalPositionSeq, iota: Width, l: Option<u32>, theta: Option<Width>) -> Result<(u32, Width)> {
    let candidates: Vec<u32> = match l {
        Some(l) => vec![l],
        None => BOC_L_SWEEP.to_vec(),
    };
    let mut best: Option<(u64, u32, Width)> = None;
    for l in candidates {
        let theta = match theta {
            Some(t) => t,
            None => min_offset_width(seq, l)?,
        };
        let params = HeaderParams {
            theta: Some(theta),
            l: Some(l),
            ..HeaderParams::new(iota)
        };
        let counts = crate::codec::HeaderCounts {
            n: seq.len() as u64,
            ..Default::default()
        };
        let bits = model_size_bits(Method::Boc, &params, &counts)?;
        if best.is_none_or(|(b, _, _)| bits < b) {
            best = Some((bits, l, theta));
        }
    }
    let (_, l, theta) = best.ok_or_else(|| Error::InvalidParameter("no BOC candidates".into()))?;
    Ok((l, theta))
}

/// Fully resolved parameters for `method` over `seq`.
pub fn resolve_params(method: Method, seq: &LogicalPositionSeq, o: &Overrides) -> Result<HeaderParams> {
    let iota = position_width(seq, o.iota)?;
    let mut params = HeaderParams::new(iota);
    match method {
        Method::Schc | Method::Lpc => {}
        Method::Boc => {
            let (l, theta) = tune_boc(seq, iota, o.l, o.theta)?;
            params.l = Some(l);
            params.theta = Some(theta);
        }
        Method::Dsc => {
            params.s = Some(match o.s {
                Some(s) => s,
                None => select_dsc_width(seq, iota, &Width::DIFFERENCE)?.0,
            });
            params.n = Some(o.n.unwrap_or(crate::codec::DEFAULT_STRIDE));
        }
    }
    Ok(params)
}

/// Builds the header for `method` with tuned defaults.
pub fn build_header(method: Method, seq: &LogicalPositionSeq, o: &Overrides) -> Result<Header> {
    Header::build(method, seq, resolve_params(method, seq, o)?)
}

/// One method's row in a size analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRow {
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
    pub measured_bits: u64,
    pub header_bytes: u64,
    /// Header plus `N · payload_len`.
    pub total_bytes: u64,
    /// `total_bytes` over the dense array `cells · payload_len`; empty when payloads are empty.
    pub pct_of_dense: Option<f64>,
    /// `total_bytes` over the baseline table file.
    pub pct_of_table: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub rows: Vec<AnalysisRow>,
    pub reports: Vec<SizeReport>,
    pub table_bytes: u64,
    pub dense_bytes: u128,
    /// Narrowing verdicts for 32→16 and 16→8 bits; empty when `N < 2`.
    pub verdicts: Vec<WidthVerdict>,
    /// DSC at `s = θ` against the chosen BOC; `None` when `θ` is 64 bits.
    pub corollary2: Option<Corollary2Check>,
}

impl Analysis {
    pub fn row(&self, method: Method) -> Option<&AnalysisRow> {
        self.rows.iter().find(|r| r.method == method.name())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(&self.rows, out)
    }
}

/// Builds and measures all four headers over `relation`.
pub fn analyze(relation: &Relation, o: &Overrides) -> Result<Analysis> {
    let seq = relation.positions();
    let schema = relation.schema();
    let n = seq.len() as u64;
    let plen = schema.payload_len() as u64;
    let table_bytes = table_file_len(schema, n)?;
    let dense_bytes = schema.cell_count() as u128 * plen as u128;

    let mut rows = Vec::with_capacity(4);
    let mut reports = Vec::with_capacity(4);
    let mut boc_params = None;
    for method in Method::ALL {
        let header = build_header(method, seq, o)?;
        if method == Method::Boc {
            boc_params = Some(header.params());
        }
        let report = SizeReport::for_header(&header)?;
        let measured_bits = report.measured_bits.unwrap_or(report.model_bits);
        let header_bytes = measured_bits / 8;
        let total_bytes = header_bytes + n * plen;
        let row = report.row();
        rows.push(AnalysisRow {
            method: row.method,
            n: row.n,
            nu: row.nu,
            m: row.m,
            iota: row.iota,
            theta: row.theta,
            l: row.l,
            s: row.s,
            model_bits: row.model_bits,
            measured_bits,
            header_bytes,
            total_bytes,
            pct_of_dense: (dense_bytes > 0).then(|| 100.0 * total_bytes as f64 / dense_bytes as f64),
            pct_of_table: 100.0 * total_bytes as f64 / table_bytes as f64,
        });
        reports.push(report);
    }

    let iota = position_width(seq, o.iota)?;
    let verdicts = match empirical_cdf(seq) {
        Ok(dist) => [(32, 16), (16, 8)]
            .into_iter()
            .map(|(z1, z2)| width_change_verdict(&dist, z1, z2, iota.bits()))
            .collect::<Result<Vec<_>>>()?,
        Err(Error::DegenerateDistribution(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    let corollary2 = match boc_params {
        Some(HeaderParams {
            theta: Some(theta),
            l: Some(l),
            ..
        }) if theta != Width::W64 => Some(check_corollary2(seq, l, theta, iota)?),
        _ => None,
    };
    Ok(Analysis {
        rows,
        reports,
        table_bytes,
        dense_bytes,
        verdicts,
        corollary2,
    })
}

/// Human-readable summary of verdicts and the Corollary 2 check.
pub fn write_analysis_notes<W: Write>(a: &Analysis, mut out: W) -> Result<()> {
    writeln!(out, "table file: {} bytes", a.table_bytes)?;
    for v in &a.verdicts {
        writeln!(out, "{}", VerdictLine(v))?;
    }
    if let Some(c) = &a.corollary2 {
        writeln!(
            out,
            "dsc with s = theta: {} bits, boc: {} bits, dsc <= boc: {}",
            c.dsc_bits, c.boc_bits, c.holds
        )?;
    }
    Ok(())
}

struct VerdictLine<'a>(&'a WidthVerdict);

impl fmt::Display for VerdictLine<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.0;
        write!(
            f,
            "s {} -> {}: {} (benefit {} bits, cost {} bits, M {} -> {}, slope {:.6} {} 1/iota = {:.6})",
            v.zeta1,
            v.zeta2,
            match v.verdict {
                WidthChange::Shrink => "shrink",
                WidthChange::Keep => "keep",
            },
            v.benefit,
            v.cost,
            v.jumps_wide,
            v.jumps_narrow,
            v.slope,
            if v.slope_below_inverse_iota { "<" } else { ">=" },
            1.0 / v.iota as f64
        )
    }
}

/// Difference-width tuning for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneReport {
    pub n: u64,
    pub iota: Width,
    pub min_gap: Option<u64>,
    pub median_gap: Option<u64>,
    pub p90_gap: Option<u64>,
    pub p99_gap: Option<u64>,
    pub max_gap: Option<u64>,
    /// `(bits, F(2^bits))` for each difference width.
    pub cdf: Vec<(u32, f64)>,
    pub candidates: Vec<SizeReport>,
    pub verdicts: Vec<WidthVerdict>,
    pub chosen: Width,
}

pub fn tune(seq: &LogicalPositionSeq, iota: Option<Width>) -> Result<TuneReport> {
    let iota = position_width(seq, iota)?;
    let (chosen, candidates) = select_dsc_width(seq, iota, &Width::DIFFERENCE)?;
    let mut report = TuneReport {
        n: seq.len() as u64,
        iota,
        min_gap: None,
        median_gap: None,
        p90_gap: None,
        p99_gap: None,
        max_gap: None,
        cdf: Vec::new(),
        candidates,
        verdicts: Vec::new(),
        chosen,
    };
    if let Ok(dist) = empirical_cdf(seq) {
        report.min_gap = Some(dist.min_gap());
        report.median_gap = Some(dist.quantile(0.5));
        report.p90_gap = Some(dist.quantile(0.9));
        report.p99_gap = Some(dist.quantile(0.99));
        report.max_gap = Some(dist.max_gap());
        report.cdf = Width::DIFFERENCE
            .iter()
            .map(|w| (w.bits(), dist.cdf_pow2(w.bits())))
            .collect();
        report.verdicts = [(32, 16), (16, 8)]
            .into_iter()
            .map(|(z1, z2)| width_change_verdict(&dist, z1, z2, iota.bits()))
            .collect::<Result<_>>()?;
    }
    Ok(report)
}

impl fmt::Display for TuneReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N = {}, iota = {}", self.n, self.iota)?;
        if let (Some(min), Some(med), Some(p90), Some(p99), Some(max)) =
            (self.min_gap, self.median_gap, self.p90_gap, self.p99_gap, self.max_gap)
        {
            writeln!(f, "gaps: min {min}, median {med}, p90 {p90}, p99 {p99}, max {max}")?;
        } else {
            writeln!(f, "gaps: none (fewer than two positions)")?;
        }
        for (bits, p) in &self.cdf {
            writeln!(f, "F(2^{bits}) = {p:.6}")?;
        }
        for c in &self.candidates {
            writeln!(
                f,
                "s = {:>2}: M = {}, {} bits",
                c.params.s.map_or(0, Width::bits),
                c.counts.m,
                c.model_bits
            )?;
        }
        for v in &self.verdicts {
            writeln!(f, "{}", VerdictLine(v))?;
        }
        write!(f, "chosen s = {}", self.chosen)
    }
}

/// One (sample, representation) measurement, shaped like a retrieval-speed table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub sample: usize,
    pub representation: String,
    pub table_seconds: f64,
    pub seconds: f64,
    /// `table_seconds / seconds`.
    pub quotient: f64,
    /// Binary-search comparisons in the table; each reads one record.
    pub table_comparisons: u64,
    pub table_reads: u64,
    pub header_steps: u64,
    pub reads: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub samples: Vec<usize>,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            samples: DEFAULT_SAMPLES.to_vec(),
            seed: 0,
        }
    }
}

/// Indexes of `k` distinct records out of `n`, uniform without replacement.
/// A request above `n` is capped at `n`.
pub fn sample_indexes(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rand::seq::index::sample(&mut rng, n, k.min(n)).into_vec()
}

/// Times the same random sample of nonempty cells against the table and
/// every store, one representation at a time. Every query must hit and
/// return the table's payload.
pub fn run_bench(table: &Table, stores: &[(String, Store)], config: &BenchConfig) -> Result<Vec<BenchRow>> {
    for (name, store) in stores {
        if store.len() != table.len() || store.schema() != table.schema() {
            return Err(Error::SchemaMismatch(format!(
                "store {name} does not hold the same relation as the table"
            )));
        }
    }
    let mut rows = Vec::new();
    for &requested in &config.samples {
        let idx = sample_indexes(table.len() as usize, requested, config.seed);
        let mut keys = Vec::with_capacity(idx.len());
        let mut expected = Vec::with_capacity(idx.len());
        for &i in &idx {
            let (coords, payload) = table.record(i as u64, &mut Probes::default())?;
            keys.push(coords);
            expected.push(payload);
        }

        let mut table_probes = Probes::default();
        let start = Instant::now();
        for (coords, want) in keys.iter().zip(&expected) {
            let got = table.point_query_probed(coords, &mut table_probes)?;
            check_hit(got, want, "table", coords)?;
        }
        let table_seconds = start.elapsed().as_secs_f64();

        for (name, store) in stores {
            let mut probes = Probes::default();
            let start = Instant::now();
            for (coords, want) in keys.iter().zip(&expected) {
                let got = store.point_query_probed(coords, &mut probes)?;
                check_hit(got, want, name, coords)?;
            }
            let seconds = start.elapsed().as_secs_f64();
            rows.push(BenchRow {
                sample: keys.len(),
                representation: name.clone(),
                table_seconds,
                seconds,
                quotient: if seconds > 0.0 { table_seconds / seconds } else { f64::INFINITY },
                table_comparisons: table_probes.header_steps,
                table_reads: table_probes.reads,
                header_steps: probes.header_steps,
                reads: probes.reads,
            });
        }
    }
    Ok(rows)
}

fn check_hit(got: Option<Vec<u8>>, want: &[u8], name: &str, coords: &[u32]) -> Result<()> {
    match got {
        Some(p) if p == want => Ok(()),
        Some(_) => Err(Error::Corruption(format!("{name}: wrong payload for {coords:?}"))),
        None => Err(Error::Corruption(format!("{name}: sampled cell {coords:?} reported empty"))),
    }
}

/// Serializes `rows` as CSV with a header row.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Header size rows for reports that need only the model and measurement.
pub fn size_rows(reports: &[SizeReport]) -> Vec<crate::tuner::SizeRow> {
    reports.iter().map(SizeReport::row).collect()
}

/// Header size over `N`, in bits per nonempty cell.
pub fn bits_per_cell(header: &Header) -> f64 {
    header.size_bits() as f64 / header.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{write_relation_store, write_table};
    use crate::workload::{generate, Profile, WorkloadSpec};

    fn small(profile: Profile, rho: f64) -> Relation {
        generate(&WorkloadSpec::new(profile, vec![60, 70, 40], rho, 5)).unwrap()
    }

    #[test]
    fn analysis_rows_are_exact() {
        let r = small(Profile::Uniform, 0.05);
        let a = analyze(&r, &Overrides::default()).unwrap();
        assert_eq!(a.rows.len(), 4);
        for row in &a.rows {
            assert!((0..=7).contains(&(row.measured_bits - row.model_bits)), "{row:?}");
            assert_eq!(row.total_bytes, row.header_bytes + r.len() as u64 * 8);
        }
        let schc = a.row(Method::Schc).unwrap();
        assert_eq!(schc.model_bits, 2 * schc.nu.unwrap() * schc.iota as u64);
        assert!(a.corollary2.unwrap().holds);
        assert_eq!(a.verdicts.len(), 2);
    }

    #[test]
    fn boc_sweep_beats_fixed_l() {
        let r = small(Profile::Singleton, 0.05);
        let seq = r.positions();
        let iota = position_width(seq, None).unwrap();
        let (l, theta) = tune_boc(seq, iota, None, None).unwrap();
        let best = BocHeaderBits::of(seq, iota, l, theta);
        for l in BOC_L_SWEEP {
            let theta = min_offset_width(seq, l).unwrap();
            assert!(best <= BocHeaderBits::of(seq, iota, l, theta));
        }
    }

    struct BocHeaderBits;

    impl BocHeaderBits {
        fn of(seq: &LogicalPositionSeq, iota: Width, l: u32, theta: Width) -> u64 {
            crate::codec::BocHeader::build(seq, l, theta, iota).unwrap().size_bits()
        }
    }

    #[test]
    fn overriding_iota_too_narrow_fails() {
        let r = small(Profile::Uniform, 0.05);
        let o = Overrides {
            iota: Some(Width::W8),
            ..Default::default()
        };
        assert!(matches!(analyze(&r, &o), Err(Error::WidthOverflow { .. })));
    }

    #[test]
    fn tune_reports_every_candidate() {
        let r = small(Profile::Singleton, 0.01);
        let t = tune(r.positions(), None).unwrap();
        assert_eq!(t.candidates.len(), 3);
        let best = t.candidates.iter().map(|c| c.model_bits).min().unwrap();
        let chosen = t.candidates.iter().find(|c| c.params.s == Some(t.chosen)).unwrap();
        assert_eq!(chosen.model_bits, best);
        assert!(t.to_string().contains("chosen s ="));
    }

    #[test]
    fn sampling_is_deterministic_and_distinct() {
        let a = sample_indexes(1000, 100, 7);
        assert_eq!(a, sample_indexes(1000, 100, 7));
        assert_ne!(a, sample_indexes(1000, 100, 8));
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_eq!(sample_indexes(10, 50, 1).len(), 10);
    }

    #[test]
    fn bench_hits_every_sampled_cell() {
        let r = small(Profile::Singleton, 0.02);
        let dir = tempfile::tempdir().unwrap();
        write_table(&r, dir.path().join("t")).unwrap();
        let mut stores = Vec::new();
        for method in Method::ALL {
            let h = build_header(method, r.positions(), &Overrides::default()).unwrap();
            let path = dir.path().join(method.name());
            write_relation_store(&r, &h, &path).unwrap();
            stores.push((method.name().to_string(), Store::open(&path).unwrap()));
        }
        let table = Table::open(dir.path().join("t")).unwrap();
        let config = BenchConfig {
            samples: vec![10, 100],
            seed: 3,
        };
        let rows = run_bench(&table, &stores, &config).unwrap();
        assert_eq!(rows.len(), 8);
        for row in &rows {
            assert_eq!(row.reads, row.sample as u64);
            assert!(row.table_reads >= row.sample as u64);
        }
        let again = run_bench(&table, &stores, &config).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!((a.header_steps, a.reads, a.table_comparisons), (b.header_steps, b.reads, b.table_comparisons));
        }
        let mut csv = Vec::new();
        write_csv(&rows, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("sample,representation,table_seconds,seconds,quotient,"));
        assert_eq!(text.lines().count(), 9);
    }
}
