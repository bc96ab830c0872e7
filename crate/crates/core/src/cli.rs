//! Command-line front end: `gen-data`, `approx`, `diagnose` and `bench`.
//!
//! Exit codes: 0 on success, 1 for usage or validation errors, 2 for I/O
//! and parse failures.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::features::{Family, FeatureMapConfig, Nonlinearity};
use crate::harness::{self, BenchOptions, Dataset};
use crate::pmodel::{self, PModelParams};
use crate::transforms::next_power_of_two;

#[derive(Debug, Parser)]
#[command(name = "structfeat", version, about = "Structured random feature maps: data, approximation, diagnostics, benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a two-class Gaussian dataset with 5% Bayes error.
    GenData(GenDataArgs),
    /// Gram-matrix reconstruction error over a sweep of feature counts.
    Approx(ApproxArgs),
    /// Structural constants of a P-model.
    Diagnose(DiagnoseArgs),
    /// Feature-map construction timings against a dense Gaussian map.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed (default 42).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, default_value_t = 550)]
    pub l: usize,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    /// Dataset CSV; a generated 550×50 dataset is used when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Feature-map config JSON; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "family", alias = "families", value_delimiter = ',')]
    pub families: Vec<Family>,
    #[arg(long)]
    pub nonlinearity: Option<Nonlinearity>,
    /// Feature counts to sweep.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub alpha: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Independent realizations per configuration.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Size of the generated dataset when `--data` is absent.
    #[arg(long, default_value_t = 550)]
    pub l: usize,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    /// Rows; defaults to `n`.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, default_value_t = 1)]
    pub alpha: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [256usize, 1024, 4096])]
    pub n: Vec<usize>,
    #[arg(
        long = "families",
        alias = "family",
        value_delimiter = ',',
        default_values_t = [Family::Circulant, Family::ToeplitzLikeSparse, Family::Fastfood, Family::Dense]
    )]
    pub families: Vec<Family>,
    /// Displacement ranks for Toeplitz-like families.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize])]
    pub r: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub alpha: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub common: Common,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Parse { .. } | Error::Json(_) => 2,
        _ => 1,
    }
}

impl Common {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

fn emit(out: &str, payload: &str) -> Result<()> {
    if out == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(payload.as_bytes())
            .and_then(|()| stdout.flush())
            .map_err(|e| Error::io("<stdout>", e))
    } else {
        harness::write_atomic(Path::new(out), payload.as_bytes())
    }
}

fn note(out: &str, line: &str) {
    if out == "-" {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

fn gen_data(args: &GenDataArgs) -> Result<()> {
    let ds = harness::gen_g50c_like(args.l, args.n, args.common.seed())?;
    emit(&args.common.out, &harness::dataset_to_csv(&ds))?;
    note(
        &args.common.out,
        &format!("wrote {} l={} n={} seed={}", args.common.out, args.l, args.n, args.common.seed()),
    );
    Ok(())
}

fn load_config(path: &Path) -> Result<FeatureMapConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn approx(args: &ApproxArgs) -> Result<()> {
    let ds: Dataset = match &args.data {
        Some(p) => harness::load_dataset_csv(p)?,
        None => harness::gen_g50c_like(args.l, args.n, args.common.seed())?,
    };
    let n_padded = next_power_of_two(ds.n());
    let mut base = match &args.config {
        Some(p) => load_config(p)?,
        None => FeatureMapConfig::new(Family::Dense, Nonlinearity::ComplexExp, 256, n_padded),
    };
    if let Some(seed) = args.common.seed {
        base.seed = seed;
    }
    if let Some(nl) = args.nonlinearity {
        base.nonlinearity = nl;
    }
    if let Some(m) = args.m {
        base.m = m;
    }
    if let Some(r) = args.r {
        base.r = r;
    }
    if let Some(a) = args.alpha {
        base.alpha = a;
    }
    if args.sigma.is_some() {
        base.sigma = args.sigma;
    }
    let families = if args.families.is_empty() {
        vec![base.family]
    } else {
        args.families.clone()
    };
    let ks = if args.k.is_empty() { vec![base.k] } else { args.k.clone() };
    if ks.contains(&0) {
        return Err(Error::invalid("k values must be positive"));
    }
    let reports = harness::approx_sweep(&ds, &base, &families, &ks, args.trials)?;
    let payload = match args.format {
        Format::Json => harness::to_canonical_json(&reports)?,
        Format::Csv => harness::gram_reports_csv(&reports),
    };
    emit(&args.common.out, &payload)?;
    note(
        &args.common.out,
        &format!("wrote {} reports={} l={} n={} seed={}", args.common.out, reports.len(), ds.l(), ds.n(), base.seed),
    );
    Ok(())
}

fn diagnose(args: &DiagnoseArgs) -> Result<()> {
    let m = args.m.unwrap_or(args.n);
    let params = PModelParams {
        r: args.r,
        alpha: args.alpha,
    };
    let model = pmodel::build_pmodel(args.family, args.n, m, params, args.common.seed())?;
    let report = pmodel::diagnose(&model)?;
    let payload = match args.format {
        Format::Json => harness::to_canonical_json(&report)?,
        Format::Csv => {
            let mut out = format!("{}\n", harness::REPORT_CSV_HEADER);
            let mut metrics = vec![
                ("mu", report.mu),
                ("mu_self", report.mu_self),
                ("mu_cross", report.mu_cross),
                ("mu_tilde", report.mu_tilde),
                ("chi_bound", report.chi_bound as f64),
                ("chi_lower", report.chi_lower as f64),
            ];
            if let Some(e) = report.eta {
                metrics.push(("eta", e));
            }
            if let Some(k) = report.kappa {
                metrics.push(("kappa", k as f64));
            }
            for (name, v) in metrics {
                let _ = writeln!(out, "{},none,{},{},{name},{v:e}", report.family, report.m, report.r);
            }
            out
        }
    };
    emit(&args.common.out, &payload)
}

fn bench(args: &BenchArgs) -> Result<()> {
    let opts = BenchOptions {
        reps: args.reps,
        ranks: args.r.clone(),
        alpha: args.alpha,
        seed: args.common.seed(),
        ..BenchOptions::default()
    };
    let rows = harness::bench_construction(&args.n, &args.families, &opts)?;
    let payload = match args.format {
        Format::Json => harness::to_canonical_json(&rows)?,
        Format::Csv => harness::bench_rows_csv(&rows),
    };
    emit(&args.common.out, &payload)
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::GenData(a) => &a.common,
        Command::Approx(a) => &a.common,
        Command::Diagnose(a) => &a.common,
        Command::Bench(a) => &a.common,
    }
}

/// Runs a parsed command inside a pool of `--threads` workers.
pub fn execute(cli: &Cli) -> Result<()> {
    let threads = common(&cli.command).threads;
    if threads == 0 {
        return Err(Error::invalid("--threads must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Approx(a) => approx(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Bench(a) => bench(a),
    })
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
