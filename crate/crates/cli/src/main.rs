use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qfridge::harness::RateSource;
use qfridge_cli::commands::{self, CommandError, SimulateOptions};
use qfridge_cli::config::{emit_config, parse_config, RunConfig};
use qfridge_cli::presets;
use qfridge_cli::quantity::{parse_quantity, Dimension};
use qfridge_cli::validate::run_validation;

#[derive(Parser)]
#[command(name = "qfridge", version, about = "Laser-driven refrigerators for microwave resonators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Configuration file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped configuration: fig2a, fig2b, sec5_nv, sec5_na.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Closed,
    Oracle,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Steady photon number over the drive grid, as a table.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Output file; overrides [output] path. Standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        rate_source: Option<SourceArg>,
    },
    /// Cooling limit and effective temperature, as a TOML report.
    Limit {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in consistency checks; exits nonzero on any failure.
    Validate {
        /// Smaller grids and a smaller composite problem.
        #[arg(long)]
        quick: bool,
    },
    /// Relaxation of the mean photon number at a fixed drive.
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Final time with unit, e.g. "50 us".
        #[arg(long)]
        t_final: Option<String>,
        #[arg(long)]
        points: Option<usize>,
        /// Drive with unit, e.g. "1 MHz"; overrides [simulate] drive.
        #[arg(long)]
        drive: Option<String>,
        /// Initial photon number; defaults to the thermal value.
        #[arg(long)]
        n0: Option<f64>,
        /// Also evolve the photon-number distribution from a Fock state.
        #[arg(long)]
        chain: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List shipped presets, or print one.
    Presets { name: Option<String> },
    /// Print the canonical form of a configuration.
    Config {
        #[command(flatten)]
        source: Source,
    },
}

/// Errors that stop a run before any output: exit status 2.
fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn load(source: &Source) -> Result<RunConfig, String> {
    let text = match (&source.config, &source.preset) {
        (Some(path), _) => std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?,
        (None, Some(name)) => {
            presets::preset(name).ok_or_else(|| format!("unknown preset `{name}`; available: {}", presets::names().join(", ")))?.to_string()
        }
        (None, None) => return Err("give --config <path> or --preset <name>".into()),
    };
    let label = source.config.as_ref().map_or_else(|| source.preset.clone().unwrap_or_default(), |p| p.display().to_string());
    parse_config(&text).map_err(|e| format!("{label}: {e}"))
}

fn writer(out: Option<&PathBuf>, cfg: Option<&RunConfig>) -> io::Result<Box<dyn Write>> {
    let path = out.cloned().or_else(|| cfg.and_then(|c| c.output.path.clone()).map(PathBuf::from));
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode, CommandError> {
    let usage = CommandError::Usage;
    match cli.command {
        Command::Sweep { source, out, rate_source } => {
            let cfg = load(&source).map_err(usage)?;
            let rs = rate_source.map(|s| match s {
                SourceArg::Closed => RateSource::ClosedForm,
                SourceArg::Oracle => RateSource::RegressionOracle,
                SourceArg::Full => RateSource::FullLiouvillian,
            });
            let outcome = commands::sweep(&cfg, rs)?;
            commands::write_sweep(writer(out.as_ref(), Some(&cfg))?, &outcome.spec, &outcome.rows, cfg.output.format)?;
            eprintln!("{}", commands::describe_minimum(&outcome.minimum));
            let failed = outcome.failed_rows();
            if failed > 0 {
                eprintln!("{failed} of {} rows failed; see the error column", outcome.rows.len());
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Limit { source, out } => {
            let cfg = load(&source).map_err(usage)?;
            let report = commands::limit(&cfg)?;
            writer(out.as_ref(), None)?.write_all(commands::format_report(&report).as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { quick } => {
            let checks = run_validation(quick);
            print!("{}", commands::format_checks(&checks));
            Ok(if checks.iter().all(|c| c.passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Simulate { source, t_final, points, drive, n0, chain, out } => {
            let cfg = load(&source).map_err(usage)?;
            let t_final = t_final.map(|t| parse_quantity(&t, Dimension::Time).map_err(|e| usage(format!("--t-final: {e}")))).transpose()?;
            let drive = drive.map(|d| parse_quantity(&d, Dimension::Frequency).map_err(|e| usage(format!("--drive: {e}")))).transpose()?;
            let opts = SimulateOptions { t_final, points, drive, n0, chain };
            let (rp, trace) = commands::simulate(&cfg, &opts)?;
            commands::write_trace(writer(out.as_ref(), Some(&cfg))?, &trace, cfg.output.format)?;
            eprintln!("steady n_ss = {:?}, relaxation rate {:?} MHz", rp.steady_photon_number()?, rp.net_damping());
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets { name: None } => {
            println!("{}", presets::names().join("\n"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets { name: Some(name) } => {
            let text = presets::preset(&name).ok_or_else(|| usage(format!("unknown preset `{name}`")))?;
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Config { source } => {
            let cfg = load(&source).map_err(usage)?;
            print!("{}", emit_config(&cfg));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}
