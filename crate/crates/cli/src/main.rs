use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;
mod input;
mod report;

use report::{Report, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{op}: {source}")]
    Module {
        op: &'static str,
        #[source]
        source: decaykit::Error,
    },
    #[error("{flag} {origin}: {message}")]
    Input { flag: &'static str, origin: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Attach the operation name to a module error.
pub fn op<T>(name: &'static str, r: decaykit::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Module { op: name, source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "decaykit", version, about = "Decay of inner functions, model-space shifts and matrix contractions")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every random draw; recorded in the output.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Assertion tolerance; each command has its own default.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// Either `--inner` (full descriptor) or `--measure` (singular part only).
#[derive(Debug, Args, Clone)]
pub struct InnerArg {
    /// Inner function descriptor: JSON file path or inline JSON.
    #[arg(long, conflicts_with = "measure")]
    inner: Option<String>,
    /// Singular measure descriptor; builds the singular inner function.
    #[arg(long)]
    measure: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// θ(z) at the given points.
    Eval {
        #[command(flatten)]
        inner: InnerArg,
        /// Point `re,im`; repeatable.
        #[arg(long, required = true, allow_hyphen_values = true)]
        z: Vec<String>,
    },
    /// Minimum modulus on circles.
    Mtheta {
        #[command(flatten)]
        inner: InnerArg,
        /// Radii, comma separated.
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        r: String,
        /// Angular grid before refinement.
        #[arg(long, default_value_t = 4096)]
        grid: usize,
    },
    /// δₙ with crossing radius and bracket.
    Deltan {
        #[command(flatten)]
        inner: InnerArg,
        /// `a..b`, `k` or a comma list.
        #[arg(long, default_value = "1..20")]
        n: String,
    },
    /// Besicovitch measure function for a built-in compact set.
    Hausdorff {
        /// `cantor`, `point`, or JSON `{"name": "point", "angle": 1.0}`.
        #[arg(long, default_value = "cantor")]
        set: String,
        #[arg(long, default_value_t = 40)]
        stages: usize,
    },
    /// εₙ sequence, and witnesses δₙ < εₙ² when an inner function is given.
    Epsilon {
        #[arg(long, default_value = "cantor")]
        set: String,
        #[arg(long, default_value_t = 40)]
        stages: usize,
        /// Number of terms.
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[command(flatten)]
        inner: InnerArg,
    },
    /// Truncations of the compressed shift.
    Modelspace {
        #[command(subcommand)]
        which: ModelCommand,
    },
    /// ‖φ(S_θ)‖ from the Hankel matrix.
    Sarason {
        #[command(flatten)]
        inner: InnerArg,
        /// `theta`, `one`, `z`, or JSON coefficients `[c0, [re, im], ...]`.
        #[arg(long, default_value = "theta")]
        phi: String,
        #[arg(long, default_value_t = 256)]
        k: usize,
    },
    /// Characteristic function checks for a matrix contraction.
    Charfn {
        /// CSV with interleaved re,im columns; file path or inline text.
        #[arg(long)]
        matrix: String,
        /// `all` or comma list of defects, model, delta, bounds, langer.
        #[arg(long, default_value = "all")]
        check: String,
        #[arg(long, default_value = "1..10")]
        n: String,
    },
    /// Acceptance battery.
    Verify {
        /// `all` or comma separated check names.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Re-run the configuration embedded in a JSON report.
    Rerun { report: PathBuf },
}

#[derive(Debug, Subcommand)]
enum ModelCommand {
    /// ‖S_θ⁻ⁿ‖ over an M schedule against (1/δₙ − 1)/2.
    Negpowers {
        #[command(flatten)]
        inner: InnerArg,
        #[arg(long, default_value = "1..20")]
        n: String,
        /// M schedule; finite Blaschke products use M = N.
        #[arg(long = "M", default_value = "16,32,64")]
        m: String,
    },
    /// Section matrix of S_θ in an orthonormal basis.
    Matrix {
        #[command(flatten)]
        inner: InnerArg,
        #[arg(long = "M", default_value_t = 16)]
        m: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Mtheta { .. } => "mtheta",
            Command::Deltan { .. } => "deltan",
            Command::Hausdorff { .. } => "hausdorff",
            Command::Epsilon { .. } => "epsilon",
            Command::Modelspace { which: ModelCommand::Negpowers { .. } } => "modelspace negpowers",
            Command::Modelspace { which: ModelCommand::Matrix { .. } } => "modelspace matrix",
            Command::Sarason { .. } => "sarason",
            Command::Charfn { .. } => "charfn",
            Command::Verify { .. } => "verify",
            Command::Rerun { .. } => "rerun",
        }
    }
}

fn run(argv: Vec<String>) -> Result<bool, CliError> {
    let cli = Cli::try_parse_from(&argv).unwrap_or_else(|e| e.exit());
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    if let Command::Rerun { report } = &cli.command {
        let text = std::fs::read_to_string(report)?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        let config: RunConfig = serde_json::from_value(v["config"].clone())?;
        let mut again = vec!["decaykit".to_string()];
        again.extend(config.args);
        again.push(format!("--seed={}", config.seed));
        again.push(format!("--format={}", config.format));
        if let Some(out) = &cli.out {
            again.push(format!("--out={}", out.display()));
        }
        return run(again);
    }

    let config = RunConfig {
        command: cli.command.name().into(),
        args: input::normalize(&argv[1..])?,
        seed: cli.seed,
        format: cli.format.name().into(),
    };
    let (records, table) = commands::dispatch(&cli)?;
    let report = Report::new(config, records, table);

    let mut sink: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.format {
        Format::Json => report.write_json(&mut sink)?,
        Format::Csv => report.write_csv(&mut sink)?,
    }
    sink.flush()?;
    for r in report.records.iter().filter(|r| !r.passed) {
        eprintln!("FAIL {}: {}", r.name, r.error.as_deref().unwrap_or(&r.assertion));
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("decaykit: {e}");
            ExitCode::from(2)
        }
    }
}
