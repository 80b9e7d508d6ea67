//! Command-line front end.
//!
//! Exit status: 0 success, 1 I/O error, 2 usage error, 3 invalid
//! configuration, 4 numerical failure.

mod commands;
mod config;
mod output;

use clap::{CommandFactory, Parser, Subcommand};
use config::RunConfig;
use output::Format;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "kitaev-trap", version, about = "Honeycomb ion-trap lattice calculations")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Configuration file (TOML, or JSON for `.json`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Absolute tolerance of the Green's-function series.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Real-space cutoff of coupling sums in units of d.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// k-grid as `N` or `N1xN2`.
    #[arg(long, global = true)]
    kgrid: Option<String>,
    /// Start from the reference design values.
    #[arg(long, global = true)]
    seed_paper_defaults: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Green's function between grounded planes along ρ.
    Greens,
    /// Two-ion dipole couplings above a plane.
    Dipole,
    /// Coupling-constant table of one family pair.
    Couplings,
    /// Bloch bands on the k-grid.
    Bands,
    /// Density of states of all three families.
    Dos,
    /// Exact and perturbative spin-spin couplings on a torus (JSON).
    Jmatrix,
    /// Field of the wire grid along x.
    Wires,
    /// Pseudopotential and bias scan on a vertical axis.
    Trapscan,
    /// Headline design numbers (JSON).
    KitaevReport,
    /// Print the effective configuration as JSON.
    Config,
}

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Usage(String),
    Config(String),
    Numeric(kitaev_trap::Error),
}

impl From<kitaev_trap::Error> for CliError {
    fn from(e: kitaev_trap::Error) -> Self {
        match e {
            kitaev_trap::Error::Config(m) => CliError::Config(m),
            kitaev_trap::Error::PatchTooLarge { .. } | kitaev_trap::Error::Domain { .. } => CliError::Config(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Io(m) => format!("i/o error: {m}"),
            CliError::Usage(m) => m.clone(),
            CliError::Config(m) => format!("configuration error: {m}"),
            CliError::Numeric(e) => match e.operation() {
                Some(op) => format!("numerical failure in {op}: {e}"),
                None => format!("numerical failure: {e}"),
            },
        }
    }
}

fn parse_kgrid(s: &str) -> Result<[usize; 2], CliError> {
    let bad = || CliError::Usage(format!("--kgrid expects N or N1xN2, got `{s}`"));
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    let nums: Vec<usize> = parts.iter().map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match nums.as_slice() {
        [n] if *n > 0 => Ok([*n, *n]),
        [a, b] if *a > 0 && *b > 0 => Ok([*a, *b]),
        _ => Err(bad()),
    }
}

fn usage() -> String {
    Cli::command().render_help().to_string()
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            if text.trim().is_empty() {
                return Err(CliError::Usage(format!("empty configuration file\n\n{}", usage())));
            }
            config::parse(&text, path).map_err(CliError::Config)?
        }
        None if cli.seed_paper_defaults => RunConfig::default(),
        None => {
            return Err(CliError::Usage(format!(
                "no configuration: pass --config FILE or --seed-paper-defaults\n\n{}",
                usage()
            )))
        }
    };
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    if let Some(c) = cli.cutoff {
        cfg.cutoff = c;
    }
    if let Some(k) = &cli.kgrid {
        cfg.kgrid = parse_kgrid(k)?;
    }
    if !(cfg.tol > 0.0) || !(cfg.cutoff > 0.0) || !(cfg.mean_frequency > 0.0) {
        return Err(CliError::Config("tol, cutoff and mean_frequency must be positive".into()));
    }
    cfg.lattice.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let Some(command) = cli.command else {
        return Err(CliError::Usage(usage()));
    };
    let cfg = load(cli)?;
    let c = serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let base = cli.config.as_ref().and_then(|p| p.parent());
    let f = cli.format;
    let text = match command {
        Command::Greens => commands::greens(&cfg, f, &c)?,
        Command::Dipole => commands::dipole(&cfg, f, &c)?,
        Command::Couplings => commands::couplings(&cfg, f, &c)?,
        Command::Bands => commands::bands(&cfg, f, &c)?,
        Command::Dos => commands::dos(&cfg, f, &c)?,
        Command::Jmatrix => commands::jmatrix(&cfg, &c)?,
        Command::Wires => commands::wires(&cfg, f, &c)?,
        Command::Trapscan => commands::trapscan(&cfg, f, &c, base)?,
        Command::KitaevReport => commands::kitaev_report(&cfg, &c)?,
        Command::Config => serde_json::to_string_pretty(&cfg).unwrap() + "\n",
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.code())
        }
    }
}
