//! Command-line front end: `latsym rearrange | verify | oracle | minimize |
//! sample`.
//!
//! Exit codes: 0 success, 1 a verified property failed, 2 usage or input
//! error, 3 internal error (including an exhausted cycle budget).

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

pub use report::{sha256_hex, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "latsym",
    version,
    about = "Discrete Schwarz rearrangement on Z^d"
)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Include wall time in the report (makes it nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Schwarz-rearrange a sparse function.
    Rearrange(RearrangeArgs),
    /// Check a rearrangement inequality on given functions.
    Verify(VerifyArgs),
    /// Exhaustive oracles.
    Oracle {
        #[command(subcommand)]
        query: OracleQuery,
    },
    /// Constrained minimization with rearrangement steps.
    Minimize {
        #[command(subcommand)]
        problem: Problem,
    },
    /// Write a seeded random function.
    Sample(SampleArgs),
}

#[derive(Args, Debug)]
struct RearrangeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// `default` or `custom:e1+e2,e1-e2,e1,e2`.
    #[arg(long, default_value = "default")]
    cycle: String,
    #[arg(long)]
    max_cycles: Option<usize>,
    /// Write every intermediate step to `<output>.step-NNNN.tsv`.
    #[arg(long)]
    trace: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum VerifyKind {
    PolyaSzego,
    Riesz,
    HardyLittlewood,
    Contraction,
    Cavalieri,
    WeightedF,
    Supermodular,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    kind: VerifyKind,
    #[arg(long)]
    u: Option<PathBuf>,
    #[arg(long)]
    v: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// `delta0 | geometric:BASE:CUTOFF | step:RADIUS`.
    #[arg(long, default_value = "delta0")]
    kernel: String,
    /// `product | negabsdiff:P`.
    #[arg(long, default_value = "product")]
    bivariate: String,
    /// Require strict supermodularity.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand, Debug)]
enum OracleQuery {
    /// Connected supports of a given size up to lattice symmetry.
    Pentominoes {
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Energy-minimizing shapes for a value multiset.
    Minimizers {
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// The pair of multisets that rules out a total order on Z^2.
    Obstruction,
    /// Exhaustive 1-D maximum of the Riesz sum.
    RieszMax {
        #[arg(long, value_delimiter = ',', required = true)]
        u_values: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        v_values: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        window: i64,
        #[arg(long, default_value = "geometric:2:8")]
        kernel: String,
        #[arg(long, default_value = "product")]
        bivariate: String,
    },
}

#[derive(Args, Debug, Clone)]
struct DomainArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    radius: usize,
    #[arg(long, default_value_t = 20_000)]
    iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Rearrange every this many iterations.
    #[arg(long, default_value_t = 10)]
    rearrange_every: usize,
    /// Write the minimizer here.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Problem {
    /// Ground state of ½||∇u||² - Σ u^{2σ+2}/(2σ+2) on ||u||_2 = c.
    Dnls {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        sigma: f64,
        #[command(flatten)]
        domain: DomainArgs,
    },
    /// Minimizes ||∇u||² + ω||u||² on ||u||_{2σ+2} = 1.
    Wave {
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        sigma: f64,
        #[command(flatten)]
        domain: DomainArgs,
    },
    /// Minimizes ||∇u||_p on ||u||_q = 1.
    Sobolev {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[command(flatten)]
        domain: DomainArgs,
    },
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    support: usize,
    #[arg(long, default_value_t = 4)]
    radius: usize,
    /// Draw values from a short list so that ties are frequent.
    #[arg(long)]
    ties: bool,
    #[arg(long)]
    output: PathBuf,
}

/// Why a command did not produce a report.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Internal(String),
}

impl From<latsym::Error> for Failure {
    fn from(e: latsym::Error) -> Self {
        use latsym::Error as E;
        match e {
            E::MaxCyclesExceeded { .. } | E::SearchExhausted(_) => Failure::Internal(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    let echo: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&cli, echo)));
    match outcome {
        Ok(Ok(code)) => code,
        Ok(Err(Failure::Usage(msg))) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            EXIT_INTERNAL
        }
        Err(_) => EXIT_INTERNAL,
    }
}

fn run(cli: &Cli, echo: Vec<String>) -> Result<i32, Failure> {
    let start = Instant::now();
    let mut report = Report::new(echo, cli.seed);
    let mut body = || commands::execute(&cli.command, cli.seed, &mut report);
    match cli.threads {
        Some(0) => return Err(Failure::Usage("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Internal(e.to_string()))?
            .install(body)?,
        None => body()?,
    }
    if cli.timing {
        report.set_wall_time(start.elapsed().as_secs_f64());
    }
    let text = report.to_json();
    match &cli.report {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Internal(format!("writing {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(if report.pass() { EXIT_PASS } else { EXIT_FAIL })
}
