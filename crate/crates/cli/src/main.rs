use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use log::info;
use lqtraj_core::experiments::{self, Experiment, ExperimentConfig, Format, Grid};
use lqtraj_core::validation::Suite;
use lqtraj_core::Error;
use serde::Deserialize;

const CONFIG_HELP: &str = "\
CONFIG FILE
  --config PATH reads one flat file of `key = value` lines (TOML syntax).
  Command-line flags override the file, the file overrides the defaults.
  Recognised keys:
    seed, trajectories, dim, dt          integers / float
    grid = \"a:b:n\"                       time grid (τ = kt for fig1-qnd, ωt for ho-position, t otherwise)
    out = \"PATH\"   format = \"csv\"|\"json\"
    oracle = true|false                  run the Monte Carlo / master-equation cross-checks
    threads                              worker threads (0 = all cores)
    hbar, mass, omega, k, r, force       model parameters
    nbar, coherent_mean                  fig1-qnd initial states (thermal n̄, coherent ⟨n⟩)
    alpha                                initial coherent amplitude for ho-position
    quadrature_order                     Gauss–Hermite order for fig1-qnd (≥ 16)
    only = [1, 5]                        validate: criteria to run

EXIT CODES
  0 success, 2 configuration error, 3 validation failure, 4 numerical error";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Switch {
    On,
    Off,
}

/// Linear quantum trajectory experiments.
#[derive(Parser, Debug)]
#[command(name = "lqtraj", version, after_help = CONFIG_HELP)]
struct Cli {
    /// fig1-qnd, momentum-linear, ho-position or validate
    experiment: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trajectories: Option<usize>,
    /// Fock-space dimension
    #[arg(long)]
    dim: Option<usize>,
    /// Integrator time step
    #[arg(long)]
    dt: Option<f64>,
    /// Abscissa grid `a:b:n`
    #[arg(long)]
    grid: Option<String>,
    /// Output file (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json; validate prints a text report unless json is asked for
    #[arg(long)]
    format: Option<String>,
    #[arg(long, value_enum)]
    oracle: Option<Switch>,
    /// Flat key-value config file, see below
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// validate: comma-separated criterion ids
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u32>>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    force: Option<f64>,
    #[arg(long)]
    nbar: Option<f64>,
    #[arg(long)]
    coherent_mean: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    quadrature_order: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    trajectories: Option<usize>,
    dim: Option<usize>,
    dt: Option<f64>,
    grid: Option<String>,
    out: Option<PathBuf>,
    format: Option<String>,
    oracle: Option<bool>,
    threads: Option<usize>,
    only: Option<Vec<u32>>,
    hbar: Option<f64>,
    mass: Option<f64>,
    omega: Option<f64>,
    k: Option<f64>,
    r: Option<f64>,
    force: Option<f64>,
    nbar: Option<f64>,
    coherent_mean: Option<f64>,
    alpha: Option<f64>,
    quadrature_order: Option<usize>,
}

enum Failure {
    Config(String),
    Validation,
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) | Error::Singular(_) | Error::DegenerateState(_) => Self::Numerical(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

struct Resolved {
    config: ExperimentConfig,
    out: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
    only: Option<Vec<u32>>,
}

fn read_config(path: &Path) -> Result<FileConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn resolve(cli: Cli) -> Result<Resolved, Failure> {
    let experiment: Experiment = cli.experiment.parse()?;
    let file = match &cli.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    let mut c = ExperimentConfig::defaults(experiment);
    macro_rules! layer {
        ($($f:ident),*) => {$(
            if let Some(v) = cli.$f.or(file.$f) {
                c.$f = v;
            }
        )*};
    }
    layer!(seed, trajectories, dim, dt, hbar, mass, omega, k, r, force, nbar, coherent_mean, alpha, quadrature_order);
    if let Some(g) = cli.grid.as_ref().or(file.grid.as_ref()) {
        c.grid = g.parse::<Grid>()?;
    }
    if let Some(o) = cli.oracle.map(|s| s == Switch::On).or(file.oracle) {
        c.oracle = o;
    }
    let format = cli.format.or(file.format).map(|f| f.parse::<Format>()).transpose()?;
    c.validate()?;
    Ok(Resolved {
        config: c,
        out: cli.out.or(file.out),
        format,
        threads: cli.threads.or(file.threads),
        only: cli.only.or(file.only),
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let r = resolve(cli)?;
    if let Some(n) = r.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let c = &r.config;
    info!("{} seed={} trajectories={} dim={} dt={}", c.experiment, c.seed, c.trajectories, c.dim, c.dt);
    if c.experiment == Experiment::Validate {
        let suite = Suite { seed: c.seed, ..Suite::default() };
        let report = match &r.only {
            Some(ids) => suite.run_selected(ids)?,
            None => suite.run_all(),
        };
        let text = match r.format {
            Some(Format::Json) => report.render_json(),
            _ => report.render_text(),
        };
        emit(&text, r.out.as_deref())?;
        return if report.passed() { Ok(()) } else { Err(Failure::Validation) };
    }
    let records = experiments::run(c)?;
    if records.iter().any(|rec| !rec.value.is_finite()) {
        return Err(Failure::Numerical("non-finite value in output".into()));
    }
    let text = experiments::render(&records, r.format.unwrap_or(Format::Csv))?;
    emit(&text, r.out.as_deref())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("lqtraj: configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Validation) => {
            eprintln!("lqtraj: validation failed");
            ExitCode::from(3)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("lqtraj: {m}");
            ExitCode::from(4)
        }
    }
}
