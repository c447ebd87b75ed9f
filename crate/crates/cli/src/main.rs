//! `mdhc`: generate sparse relations, build and query header-compressed
//! stores, and report sizes and point-query costs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mdhc_core::bench::{self, BenchConfig, Overrides};
use mdhc_core::store::{write_relation_store, write_table, Store, Table};
use mdhc_core::text;
use mdhc_core::tuner::SizeReport;
use mdhc_core::workload::{self, Profile, WorkloadSpec};
use mdhc_core::{Error, Method, Relation, Width};

#[derive(Parser)]
#[command(name = "mdhc", version, about = "Sparse multidimensional arrays with compressed position headers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic relation as a schema file and a cells file.
    Gen {
        #[command(flatten)]
        workload: WorkloadArgs,
        /// Output prefix; writes PREFIX.schema and PREFIX.cells.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a store file (and optionally the baseline table file).
    Build {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "dsc")]
        method: Method,
        #[command(flatten)]
        params: ParamArgs,
        /// Store file to write.
        #[arg(long)]
        out: PathBuf,
        /// Also write the baseline table file here.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Write the size report here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Size of all four headers, as CSV. Tuner verdicts go to stderr.
    Analyze {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Time point queries on a random sample of nonempty cells.
    Bench {
        /// Baseline table file.
        #[arg(long)]
        table: PathBuf,
        /// Store files to compare against the table.
        #[arg(required = true)]
        stores: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = bench::DEFAULT_SAMPLES)]
        samples: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Difference-width tuning report.
    Tune {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        iota: Option<Width>,
        /// Also write the per-width size rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Look up one cell by its labels; prints the payload in hex or EMPTY.
    Query {
        #[arg(long)]
        store: PathBuf,
        /// One label per dimension.
        #[arg(required = true)]
        labels: Vec<String>,
    },
}

#[derive(Args)]
struct WorkloadArgs {
    #[arg(long, default_value = "uniform")]
    profile: Profile,
    /// Cardinalities, comma separated.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<u32>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, default_value_t = workload::DEFAULT_MIN_RUN)]
    min_run: u32,
    #[arg(long, default_value_t = workload::DEFAULT_PAYLOAD_LEN)]
    payload_len: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Either `--schema` and `--cells`, or generator flags.
#[derive(Args)]
struct Source {
    #[arg(long, requires = "cells", conflicts_with_all = ["dims", "density"])]
    schema: Option<PathBuf>,
    #[arg(long, requires = "schema")]
    cells: Option<PathBuf>,
    #[command(flatten)]
    workload: WorkloadArgs,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    iota: Option<Width>,
    #[arg(long)]
    theta: Option<Width>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long)]
    s: Option<Width>,
    #[arg(long)]
    n: Option<u16>,
}

impl ParamArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            iota: self.iota,
            theta: self.theta,
            l: self.l,
            s: self.s,
            n: self.n,
        }
    }
}

/// Failure of a command: bad invocation or bad data.
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Data(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Data(Error::Io(e))
    }
}

impl WorkloadArgs {
    fn spec(&self) -> Result<WorkloadSpec, Failure> {
        if self.dims.is_empty() {
            return Err(Failure::Usage("--dims is required (or --schema and --cells)".into()));
        }
        let density = self
            .density
            .ok_or_else(|| Failure::Usage("--density is required with --dims".into()))?;
        Ok(WorkloadSpec {
            profile: self.profile,
            dims: self.dims.clone(),
            density,
            min_run: self.min_run,
            seed: self.seed,
            payload_len: self.payload_len,
        })
    }
}

impl Source {
    fn load(&self) -> Result<Relation, Failure> {
        match (&self.schema, &self.cells) {
            (Some(schema), Some(cells)) => {
                let dims = text::read_dimensions(BufReader::new(File::open(schema)?))?;
                Ok(text::read_relation(dims, None, BufReader::new(File::open(cells)?))?)
            }
            _ => Ok(workload::generate(&self.workload.spec()?)?),
        }
    }
}

/// Stdout, or a file when `path` is set.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen { workload, out } => {
            let relation = workload::generate(&workload.spec()?)?;
            let mut schema = BufWriter::new(File::create(out.with_extension("schema"))?);
            text::write_schema(relation.schema(), &mut schema)?;
            schema.flush()?;
            let mut cells = BufWriter::new(File::create(out.with_extension("cells"))?);
            text::write_cells(&relation, &mut cells)?;
            cells.flush()?;
            eprintln!(
                "{} nonempty cells of {} ({:.4}% dense)",
                relation.len(),
                relation.schema().cell_count(),
                100.0 * relation.len() as f64 / relation.schema().cell_count() as f64
            );
        }
        Command::Build {
            source,
            method,
            params,
            out,
            table,
            csv,
        } => {
            let relation = source.load()?;
            let header = bench::build_header(method, relation.positions(), &params.overrides())?;
            write_relation_store(&relation, &header, &out)?;
            if let Some(t) = table {
                write_table(&relation, t)?;
            }
            let report = SizeReport::for_header(&header)?;
            let mut w = sink(csv.as_deref())?;
            bench::write_csv(&[report.row()], &mut w)?;
            w.flush()?;
        }
        Command::Analyze { source, params, csv } => {
            let relation = source.load()?;
            let analysis = bench::analyze(&relation, &params.overrides())?;
            let mut w = sink(csv.as_deref())?;
            analysis.write_csv(&mut w)?;
            w.flush()?;
            bench::write_analysis_notes(&analysis, io::stderr().lock())?;
        }
        Command::Bench {
            table,
            stores,
            samples,
            seed,
            csv,
        } => {
            if samples.contains(&0) {
                return Err(Failure::Usage("sample sizes must be positive".into()));
            }
            let table = Table::open(&table)?;
            let stores = stores
                .iter()
                .map(|p| {
                    // the full file name, so rel.dsc and rel.boc stay distinguishable
                    let name = p
                        .file_name()
                        .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
                    Store::open(p).map(|s| (name, s))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let rows = bench::run_bench(&table, &stores, &BenchConfig { samples, seed })?;
            let mut w = sink(csv.as_deref())?;
            bench::write_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Command::Tune { source, iota, csv } => {
            let relation = source.load()?;
            let report = bench::tune(relation.positions(), iota)?;
            println!("{report}");
            if let Some(p) = csv {
                let mut w = sink(Some(&p))?;
                bench::write_csv(&bench::size_rows(&report.candidates), &mut w)?;
                w.flush()?;
            }
        }
        Command::Query { store, labels } => {
            let store = Store::open(&store)?;
            let coords = store.schema().ordinals(&labels)?;
            match store.point_query(&coords)? {
                Some(payload) => println!("{}", hex_lower(&payload)),
                None => println!("EMPTY"),
            }
        }
    }
    Ok(())
}

fn hex_lower(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
