mod commands;
mod report;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use fgforge::coeff_file::{read_expansion, write_expansion};
use fgforge::Tolerances;

use commands::Outcome;
use report::RunReport;
use spec::{JobSpec, SpecError};

/// Fefferman–Graham expansions of asymptotically hyperbolic Einstein metrics
/// on the 3-torus.
///
/// Reports are written to stdout as JSON, logs to stderr. Exit codes: 0 on
/// success, 1 for malformed input, 2 for a constraint violation, 3 for a
/// numerical or audit failure. FGFORGE_THREADS caps the worker pool.
#[derive(Debug, Parser)]
#[command(name = "fgforge", version)]
struct Cli {
    /// Include wall-clock time in the report (breaks byte-identical reports).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the coefficients from boundary data.
    Expand {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        /// Coefficient file to write (overrides the job's `output`).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        grid: Option<usize>,
        #[arg(long, value_name = "K")]
        order: Option<usize>,
    },
    /// Re-run every audit on a coefficient file.
    Verify {
        input: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Job file whose tolerances to use.
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
    },
    /// Continue a Riemannian expansion to the Lorentzian signature.
    Wick {
        input: PathBuf,
        /// Lorentzian coefficient file to write.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
    },
    /// Check the complementing condition at sampled covectors.
    Ellipticity {
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the symbol with duplicated boundary rows.
        #[arg(long)]
        degenerate: bool,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Emit the expansion of a closed-form reference metric.
    Reference {
        /// cusp, cone or ads_schwarzschild_planar
        name: String,
        #[arg(long, default_value_t = 0.5)]
        mass: f64,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, default_value_t = 6)]
        order: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|e| SpecError(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), SpecError> {
    std::fs::write(path, text).map_err(|e| SpecError(format!("{}: {e}", path.display())))
}

fn tolerances(spec: Option<&Path>) -> Result<Tolerances, SpecError> {
    match spec {
        Some(p) => Ok(JobSpec::parse(&read(p)?)?.tolerances),
        None => Ok(Tolerances::default()),
    }
}

fn load_expansion(path: &Path) -> Result<fgforge::fg::FGExpansion, SpecError> {
    read_expansion(&read(path)?).map_err(|e| SpecError(format!("{}: {e}", path.display())))
}

fn thread_count() -> Result<usize, SpecError> {
    match std::env::var("FGFORGE_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| SpecError(format!("FGFORGE_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Write the coefficient file, if there is one and a destination.
fn finish(outcome: Outcome, coeff_path: Option<&Path>) -> Result<RunReport, SpecError> {
    if let (Some(e), Some(path)) = (&outcome.coefficients, coeff_path) {
        write(path, &write_expansion(e))?;
        eprintln!("wrote coefficients to {}", path.display());
    }
    Ok(outcome.report)
}

fn run(cli: &Cli, threads: usize) -> Result<(RunReport, Option<PathBuf>), SpecError> {
    match &cli.command {
        Command::Expand { spec, out, grid, order } => {
            let mut job = JobSpec::parse(&read(spec)?)?;
            if job.command != "expand" {
                return Err(SpecError(format!("job command is {:?}, expected \"expand\"", job.command)));
            }
            if let Some(n) = grid {
                job.grid = *n;
            }
            if let Some(k) = order {
                job.order = *k;
            }
            job.validate()?;
            eprintln!("expanding to order {} on a {}^3 grid", job.order, job.grid);
            let outcome = commands::cmd_expand(&job, threads)?;
            let path = out.clone().or_else(|| job.output.as_ref().map(PathBuf::from));
            Ok((finish(outcome, path.as_deref())?, None))
        }
        Command::Verify { input, out, spec } => {
            let tol = tolerances(spec.as_deref())?;
            let e = load_expansion(input)?;
            Ok((commands::cmd_verify(&e, &tol, threads), out.clone()))
        }
        Command::Wick { input, out, spec } => {
            let tol = tolerances(spec.as_deref())?;
            let e = load_expansion(input)?;
            let outcome = commands::cmd_wick(&e, &tol, threads)?;
            Ok((finish(outcome, out.as_deref())?, None))
        }
        Command::Ellipticity { samples, seed, degenerate, out } => Ok((
            commands::cmd_ellipticity(*samples, *seed, *degenerate, threads),
            out.clone(),
        )),
        Command::Reference { name, mass, grid, order, out } => {
            if *order < 3 {
                return Err(SpecError(format!("order must be at least 3, got {order}")));
            }
            let outcome =
                commands::cmd_reference(name, *mass, *grid, *order, &Tolerances::default(), threads)?;
            Ok((finish(outcome, out.as_deref())?, None))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match thread_count() {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: cannot start worker pool: {e}");
        return ExitCode::from(3);
    }
    let start = Instant::now();
    let (mut report, report_path) = match run(&cli, threads) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if cli.timing {
        report.timing_seconds = Some(start.elapsed().as_secs_f64());
    }
    let text = report.to_json();
    match report_path {
        Some(path) => {
            if let Err(e) = write(&path, &text) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    if let Some(err) = &report.error {
        eprintln!("{}: {}", err.kind, err.message);
    }
    ExitCode::from(report.status.exit_code() as u8)
}
