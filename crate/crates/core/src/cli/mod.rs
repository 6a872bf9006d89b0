//! Command-line front end.
//!
//! ```text
//! expamoeba analyze <input.json> [--resolution N] [--theta-grid N] [--box ...] [--out report.json]
//! expamoeba render  <input.json> [--window x0,x1,y0,y1] [--density N] [--heat] --out <dir>
//! expamoeba bounds  <input.json>
//! ```
//!
//! Exit codes: 0 success, 1 analysis error, 2 usage or parse error.

mod commands;
pub mod document;
pub mod exact;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    bounds_line, cmd_analyze, cmd_bounds, cmd_render, default_window, RenderOutput,
};
pub use document::{InputDocument, ReportDocument, TermEntry, INPUT_SCHEMA, REPORT_SCHEMA};

use crate::amoeba::{
    AnalysisConfig, ScanBox, ScanSettings, DEFAULT_RESOLUTION, DEFAULT_THETA_GRID,
};
use crate::render::Window;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ANALYSIS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "expamoeba",
    version,
    about = "Amoebas of exponential sums with real spectrum"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full analysis; writes a JSON report.
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        scan: ScanArgs,
        /// Report path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Amoeba and polytope SVG figures (rank 2 only).
    Render {
        input: PathBuf,
        /// x0,x1,y0,y1 in amoeba coordinates.
        #[arg(long, value_parser = parse_floats)]
        window: Option<Floats>,
        /// Samples per unit length.
        #[arg(long, default_value_t = 10)]
        density: usize,
        /// Gray-level min-modulus heat map.
        #[arg(long)]
        heat: bool,
        #[arg(long, default_value_t = DEFAULT_THETA_GRID)]
        theta_grid: usize,
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// One-line bound chain `cardV ≤ ρ ≤ cardΛ < υ`.
    Bounds {
        input: PathBuf,
        #[command(flatten)]
        scan: ScanArgs,
    },
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Samples per axis.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    /// θ-grid nodes per axis.
    #[arg(long, default_value_t = DEFAULT_THETA_GRID)]
    theta_grid: usize,
    /// Scan box: x0,x1 (n = 1) or x0,x1,y0,y1 (n = 2).
    #[arg(long = "box", value_parser = parse_floats)]
    scan_box: Option<Floats>,
    #[arg(long)]
    threads: Option<usize>,
}

impl ScanArgs {
    fn config(&self) -> Result<AnalysisConfig> {
        let scan_box = match &self.scan_box {
            None => None,
            Some(Floats(v)) if v.len() % 2 == 0 && !v.is_empty() => {
                let lower = v.iter().step_by(2).cloned().collect();
                let upper = v.iter().skip(1).step_by(2).cloned().collect();
                Some(ScanBox::new(lower, upper)?)
            }
            Some(Floats(v)) => {
                return Err(Error::Parse(format!(
                    "--box needs pairs of bounds, got {} numbers",
                    v.len()
                )))
            }
        };
        Ok(AnalysisConfig {
            scan: ScanSettings {
                resolution: self.resolution,
                theta_grid: self.theta_grid,
                ..ScanSettings::default()
            },
            scan_box,
        })
    }
}

/// Comma-separated list of numbers.
#[derive(Clone, Debug)]
struct Floats(Vec<f64>);

fn parse_floats(s: &str) -> std::result::Result<Floats, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()
        .map(Floats)
}

fn with_threads<T>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T>
where
    T: Send,
{
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Parse(format!("--threads: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Parse(_) => EXIT_USAGE,
        _ => EXIT_ANALYSIS,
    }
}

fn report_error(e: &Error) {
    let doc = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
    });
    eprintln!("{doc}");
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { input, scan, out } => {
            let config = scan.config()?;
            let json = with_threads(scan.threads, || cmd_analyze(&input, &config))??;
            match out {
                Some(path) => std::fs::write(&path, json)?,
                None => print!("{json}"),
            }
        }
        Command::Render {
            input,
            window,
            density,
            heat,
            theta_grid,
            threads,
            out,
        } => {
            let window = match window {
                None => None,
                Some(Floats(v)) if v.len() == 4 => Some(Window::new(v[0], v[1], v[2], v[3])?),
                Some(Floats(v)) => {
                    return Err(Error::Parse(format!(
                        "--window needs 4 numbers, got {}",
                        v.len()
                    )))
                }
            };
            let written = with_threads(threads, || {
                cmd_render(&input, window, density, heat, theta_grid, &out)
            })??;
            println!("{}", written.amoeba.display());
            println!("{}", written.polytope.display());
            println!("labeled regions: {}", written.labeled_regions);
        }
        Command::Bounds { input, scan } => {
            let config = scan.config()?;
            let line = with_threads(scan.threads, || cmd_bounds(&input, &config))??;
            println!("{line}");
        }
    }
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            report_error(&e);
            exit_code(&e)
        }
    }
}
