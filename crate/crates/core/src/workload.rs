//! Synthetic sparse relations.
//!
//! * `singleton`: no two nonempty cells are adjacent, so every run has
//!   length one (the worst case for run-based headers).
//! * `longrun`: nonempty cells come in runs of at least `min_run` cells,
//!   like a dense time axis.
//! * `uniform`: every cell is nonempty independently with probability ρ.
//!
//! Gaps are drawn from geometric distributions tuned so that the expected
//! density is ρ. Output is fully determined by the workload parameters and the seed.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric};

use crate::error::{Error, Result};
use crate::relation::{LogicalPositionSeq, Relation, RelationSchema};

pub const DEFAULT_MIN_RUN: u32 = 17;
pub const DEFAULT_PAYLOAD_LEN: u32 = 8;
const MAX_EXPECTED_CELLS: f64 = (1u64 << 32) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Singleton,
    LongRun,
    Uniform,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Singleton => "singleton",
            Profile::LongRun => "longrun",
            Profile::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Profile> {
        match s.to_ascii_lowercase().as_str() {
            "singleton" => Ok(Profile::Singleton),
            "longrun" => Ok(Profile::LongRun),
            "uniform" => Ok(Profile::Uniform),
            other => Err(Error::Workload(format!("unknown profile {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub profile: Profile,
    pub dims: Vec<u32>,
    pub density: f64,
    pub min_run: u32,
    pub seed: u64,
    pub payload_len: u32,
}

impl WorkloadSpec {
    pub fn new(profile: Profile, dims: Vec<u32>, density: f64, seed: u64) -> WorkloadSpec {
        WorkloadSpec {
            profile,
            dims,
            density,
            min_run: DEFAULT_MIN_RUN,
            seed,
            payload_len: DEFAULT_PAYLOAD_LEN,
        }
    }

    fn validate(&self) -> Result<()> {
        let rho = self.density;
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::Workload(format!("density {rho} outside (0, 1]")));
        }
        if self.profile == Profile::Singleton && rho > 0.5 {
            return Err(Error::Workload(format!(
                "singleton profile cannot exceed density 0.5, got {rho}"
            )));
        }
        if self.profile == Profile::LongRun && self.min_run == 0 {
            return Err(Error::Workload("min_run must be >= 1".into()));
        }
        Ok(())
    }
}

/// Failures before the first success with probability `p`.
///
/// `Geometric` does not terminate once `1 - p` rounds to 1, so tiny `p` is
/// sampled as `⌊Exp(λ)⌋` with `λ = -ln(1 - p)`, which has the same law.
enum Failures {
    Direct(Geometric),
    ViaExp(Exp<f64>),
}

impl Failures {
    fn sample(&self, rng: &mut impl RngCore) -> u64 {
        match self {
            Failures::Direct(g) => g.sample(rng),
            // float-to-int casts saturate
            Failures::ViaExp(e) => e.sample(rng).floor() as u64,
        }
    }
}

fn geometric(p: f64) -> Result<Failures> {
    let bad = |e: &dyn fmt::Display| Error::Workload(format!("bad geometric parameter {p}: {e}"));
    let p = p.clamp(f64::MIN_POSITIVE, 1.0);
    if p >= 1e-9 {
        Geometric::new(p).map(Failures::Direct).map_err(|e| bad(&e))
    } else {
        Exp::new(-(-p).ln_1p()).map(Failures::ViaExp).map_err(|e| bad(&e))
    }
}

/// Failures distribution with the given mean.
fn geometric_with_mean(mean: f64) -> Result<Failures> {
    geometric(1.0 / (mean.max(0.0) + 1.0))
}

/// Positions only; see [`generate`].
pub fn generate_positions(spec: &WorkloadSpec) -> Result<LogicalPositionSeq> {
    spec.validate()?;
    let schema = RelationSchema::from_cardinalities(&spec.dims, spec.payload_len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    positions_for(spec, schema.cell_count(), &mut rng)
}

fn positions_for(spec: &WorkloadSpec, space: u64, rng: &mut impl RngCore) -> Result<LogicalPositionSeq> {
    let rho = spec.density;
    if rho * space as f64 > MAX_EXPECTED_CELLS {
        return Err(Error::Workload(format!(
            "expected {:.0} cells, more than this generator supports",
            rho * space as f64
        )));
    }
    let mut out = Vec::with_capacity((rho * space as f64 * 1.05) as usize + 16);
    match spec.profile {
        Profile::Uniform => {
            let extra = geometric(rho)?;
            let mut next = extra.sample(rng);
            while next < space {
                out.push(next);
                next = match next.checked_add(1 + extra.sample(rng)) {
                    Some(n) => n,
                    None => break,
                };
            }
        }
        Profile::Singleton => {
            // gap = 2 + Geom(p) has mean 1/ρ when p = ρ / (1 - ρ)
            let extra = geometric(rho / (1.0 - rho))?;
            let mut next = extra.sample(rng);
            while next < space {
                out.push(next);
                next = match next.checked_add(2 + extra.sample(rng)) {
                    Some(n) => n,
                    None => break,
                };
            }
        }
        Profile::LongRun => {
            if rho >= 1.0 {
                out.extend(0..space);
            } else {
                let min_run = spec.min_run as f64;
                let mut mean_run = 2.0 * min_run;
                let mut mean_gap = mean_run * (1.0 - rho) / rho;
                if mean_gap < 1.0 {
                    mean_gap = 1.0;
                    mean_run = rho / (1.0 - rho);
                }
                let run_extra = geometric_with_mean(mean_run - min_run)?;
                let gap_extra = geometric_with_mean(mean_gap - 1.0)?;
                // start inside a gap so that the first run is not always at 0
                let mut start = gap_extra.sample(rng);
                while start < space {
                    let len = spec.min_run as u64 + run_extra.sample(rng);
                    let end = start.saturating_add(len).min(space);
                    if end - start < spec.min_run as u64 {
                        break;
                    }
                    out.extend(start..end);
                    start = end.saturating_add(1 + gap_extra.sample(rng));
                }
            }
        }
    }
    LogicalPositionSeq::new(out)
}

/// Generates a relation with random payloads.
pub fn generate(spec: &WorkloadSpec) -> Result<Relation> {
    spec.validate()?;
    let schema = RelationSchema::from_cardinalities(&spec.dims, spec.payload_len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let positions = positions_for(spec, schema.cell_count(), &mut rng)?;
    let mut payloads = vec![0u8; positions.len() * spec.payload_len as usize];
    rng.fill(payloads.as_mut_slice());
    Relation::new(schema, positions, payloads)
}
