//! `qosc` command line: identity verification, weight tables and the
//! truncated-spectrum experiment.

pub mod config;
pub mod output;
pub mod registry;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use globset::{Glob, GlobSetBuilder};
use qosc::fock::{spectral_experiment, Regularisation};
use qosc::{IdentityReport, QoscError};
use rayon::prelude::*;
use thiserror::Error;

use config::{parse_complex, Format, GammaSpec, Overrides, RunConfig};
use output::Table;
use registry::{registry, Env};
use table::{parse_grid, parse_spins, tabulate, TableRequest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] QoscError),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Csv(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qosc", version, about = "Numerical verification of q-oscillator identities and Boltzmann weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every registered identity matching the filter.
    Verify(VerifyArgs),
    /// Tabulate a weight (fock.V, vgamma.Vbold, modular.V) over a grid.
    Table(TableArgs),
    /// Lowest branches of the truncated Hamiltonian against their limits.
    Spectrum(SpectrumArgs),
    /// Print the registered identity ids.
    List,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Glob over identity ids, e.g. 'fock.*'; repeatable.
    #[arg(long)]
    pub filter: Vec<String>,
    /// Nome, e.g. 0.4 or 0.3+0.2i [default: 0.4].
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// generic:C, a bare complex C, or selected:NU with NU in {0, 1/2, -1/2}.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Angle of b = e^{i theta} in (0, pi/2) [default: pi/5].
    #[arg(long)]
    pub theta: Option<f64>,
    /// Series tolerance [default: 1e-9].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Series term cap [default: 10000].
    #[arg(long)]
    pub max_terms: Option<usize>,
    /// Seed of randomised parameter points [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report format [default: human].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// TOML file with [params] and [run] sections; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// fock.V, vgamma.Vbold or modular.V.
    pub weight_id: String,
    /// Spectral parameter; `q` means the nome itself.
    #[arg(long, default_value = "0.7", allow_hyphen_values = true)]
    pub x: String,
    /// Inclusive spin range for both arguments.
    #[arg(long, default_value = "0:5", allow_hyphen_values = true)]
    pub spins: String,
    #[arg(long, default_value = "0.4", allow_hyphen_values = true)]
    pub q: String,
    #[arg(long, default_value = "selected:0", allow_hyphen_values = true)]
    pub gamma: String,
    /// Crossing parameter of modular.V.
    #[arg(long, default_value = "0.3i", allow_hyphen_values = true)]
    pub mu: String,
    #[arg(long, default_value_t = std::f64::consts::PI / 5.0)]
    pub theta: f64,
    /// Rapidity grid start:end:count of modular.V, used for both x and y.
    #[arg(long, default_value = "-1:1:5", allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Increasing truncation sizes.
    #[arg(long = "N-list", alias = "n-list", value_delimiter = ',', default_value = "8,16,32")]
    pub n_list: Vec<usize>,
    /// Boundary regularisation.
    #[arg(long, default_value = "I")]
    pub reg: String,
    #[arg(long, default_value_t = 0.4)]
    pub q: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Verify(a) => verify(a, out),
        Command::Table(a) => table_command(a, out).map(|()| 0),
        Command::Spectrum(a) => spectrum_command(a, out).map(|()| 0),
        Command::List => registry()
            .iter()
            .try_for_each(|e| writeln!(out, "{}", e.id))
            .map(|()| 0)
            .map_err(CliError::from),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "qosc: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(err, "run `qosc --help` for usage");
            }
            e.exit_code()
        }
    }
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &a.config {
        cfg = cfg.merge_file(path)?;
    }
    let cfg = cfg.apply(Overrides {
        filters: a.filter,
        q: a.q,
        gamma: a.gamma,
        theta: a.theta,
        tol: a.tol,
        max_terms: a.max_terms,
        seed: a.seed,
        format: a.format,
        jobs: a.jobs,
    })?;
    let reports = run(&cfg)?;
    output::write_reports(out, &reports, cfg.format)?;
    Ok(if reports.iter().all(|r| r.verdict.is_ok()) { 0 } else { 1 })
}

/// Runs the matching identities on a pool of `cfg.jobs` threads and returns
/// the reports sorted by id, then params.
pub fn run(cfg: &RunConfig) -> Result<Vec<IdentityReport>, CliError> {
    let mut globs = GlobSetBuilder::new();
    for f in &cfg.filters {
        globs.add(Glob::new(f).map_err(|e| CliError::Usage(format!("bad filter {f:?}: {e}")))?);
    }
    let globs = globs.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let selected: Vec<_> = registry().into_iter().filter(|e| globs.is_match(e.id)).collect();
    if selected.is_empty() {
        return Err(CliError::Usage(format!(
            "filter {:?} matches no identity; `qosc list` prints the registered ids",
            cfg.filters
        )));
    }
    let env = Env::new(cfg)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.jobs {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    let mut reports: Vec<IdentityReport> =
        pool.install(|| selected.par_iter().flat_map_iter(|e| e.run(&env)).collect());
    reports.sort_by(|a, b| (&a.identity_id, &a.params).cmp(&(&b.identity_id, &b.params)));
    Ok(reports)
}

fn table_command(a: TableArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let request = TableRequest {
        weight: a.weight_id.parse()?,
        q: parse_complex(&a.q)?,
        x: a.x,
        spins: parse_spins(&a.spins)?,
        gamma: a.gamma.parse::<GammaSpec>()?,
        mu: parse_complex(&a.mu)?,
        theta: a.theta,
        grid: parse_grid(&a.grid)?,
    };
    tabulate(&request)?.write(out, a.format)
}

fn spectrum_command(a: SpectrumArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let reg: Regularisation = a.reg.parse().map_err(|_| CliError::Usage(format!("--reg must be I, II or III, got {:?}", a.reg)))?;
    let report = spectral_experiment(a.q, &a.n_list, reg).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut rows = Vec::new();
    for row in &report.rows {
        for (k, ev) in row.eigenvalues.iter().enumerate() {
            let dev = row.deviations.get(k).copied().unwrap_or(f64::NAN);
            rows.push(vec![row.n as f64, k as f64, ev.re, ev.im, dev]);
        }
    }
    Table { columns: vec!["N", "branch", "re", "im", "deviation"], rows }.write(out, a.format)?;
    if reg == Regularisation::III && a.format == Format::Human {
        let (odd, even) = report.parity_limits();
        let show = |v: Option<qosc::C>| v.map_or("-".to_string(), |z| format!("{z:.10}"));
        writeln!(out, "lowest eigenvalue: odd N {}, even N {}", show(odd), show(even))?;
    }
    Ok(())
}
