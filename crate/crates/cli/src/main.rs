use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use procsteer::fixtures::project_fixture;
use procsteer::linalg::MatrixFile;
use procsteer::qstate::singlet;
use procsteer_cli::analyze::{analyze_state, Metric};
use procsteer_cli::config::{DEFAULT_NOISE_P, DEFAULT_SHOTS};
use procsteer_cli::output::gnuplot_script;
use procsteer_cli::phi_table::{check_covariance, run_phi_table};
use procsteer_cli::sweep::{check_monotone, run_sweep, write_csv};
use procsteer_cli::{CliError, Grid, Scenario, Shots, SweepConfig};

#[derive(Parser)]
#[command(name = "procsteer", version, about = "Process steering analysis of remote state preparation")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Sampling {
    /// Counts per tomography setting.
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: u64,
    /// Skip count simulation and use the noiseless outputs.
    #[arg(long)]
    exact: bool,
    /// Base seed; grid point k uses seed + k.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the half-wave-plate angle of the walk-off compensation.
    SweepWalkoff {
        #[arg(long, default_value_t = 0.0)]
        theta_start: f64,
        #[arg(long, default_value_t = 90.0)]
        theta_end: f64,
        #[arg(long, default_value_t = 5.0)]
        theta_step: f64,
        /// White-noise weight of the theory track.
        #[arg(long, default_value_t = DEFAULT_NOISE_P)]
        pnoise: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[command(flatten)]
        sampling: Sampling,
        /// CSV output; a gnuplot script is written next to it. Stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the white-noise weight of Werner resources.
    SweepWerner {
        #[arg(long, default_value_t = 0.0)]
        p_start: f64,
        #[arg(long, default_value_t = 1.0)]
        p_end: f64,
        #[arg(long, default_value_t = 0.05)]
        p_step: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reports and Bloch-length comparison for the four experimental angles.
    PhiTable {
        /// Resource state as a matrix file; the singlet if absent.
        #[arg(long)]
        state: Option<PathBuf>,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metrics of a two-qubit matrix file.
    Analyze {
        path: PathBuf,
        /// Comma-separated; all if absent.
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<Metric>,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn sweep(cfg: SweepConfig, out: Option<PathBuf>) -> Result<(), CliError> {
    let records = run_sweep(&cfg)?;
    let mut w = sink(out.as_deref())?;
    write_csv(&records, &mut w)?;
    w.flush()?;
    if let Some(csv) = &out {
        let script = csv.with_extension("gp");
        std::fs::write(&script, gnuplot_script(csv, cfg.scenario, &csv.with_extension("png")))?;
        info!("wrote {} and {}", csv.display(), script.display());
    }
    // outputs are written first so a failing post-check can still be inspected
    check_monotone(&cfg, &records)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SweepWalkoff {
            theta_start,
            theta_end,
            theta_step,
            pnoise,
            phi,
            sampling,
            out,
        } => {
            let cfg = SweepConfig {
                scenario: Scenario::Walkoff,
                grid: Grid::new(theta_start, theta_end, theta_step)?,
                phi,
                noise_p: pnoise,
                shots: Shots::new(sampling.shots, sampling.exact)?,
                seed: sampling.seed,
            };
            sweep(cfg, out)
        }
        Command::SweepWerner {
            p_start,
            p_end,
            p_step,
            phi,
            sampling,
            out,
        } => {
            let cfg = SweepConfig {
                scenario: Scenario::Werner,
                grid: Grid::new(p_start, p_end, p_step)?,
                phi,
                noise_p: DEFAULT_NOISE_P,
                shots: Shots::new(sampling.shots, sampling.exact)?,
                seed: sampling.seed,
            };
            sweep(cfg, out)
        }
        Command::PhiTable { state, sampling, out } => {
            let rho = match &state {
                None => singlet(),
                Some(p) => {
                    let input = |source| CliError::Input {
                        path: p.display().to_string(),
                        source,
                    };
                    let file = MatrixFile::read(p).map_err(input)?;
                    let name = file.name.clone().unwrap_or_else(|| p.display().to_string());
                    project_fixture(&file.to_matrix().map_err(input)?, &name)?
                }
            };
            let table = run_phi_table(&rho, Shots::new(sampling.shots, sampling.exact)?, sampling.seed)?;
            write_json(&table, out.as_deref())?;
            check_covariance(&table)
        }
        Command::Analyze {
            path,
            metrics,
            phi,
            out,
        } => {
            let metrics = if metrics.is_empty() { Metric::ALL.to_vec() } else { metrics };
            write_json(&analyze_state(&path, &metrics, phi)?, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
