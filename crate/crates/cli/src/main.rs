//! Command-line front end: pattern walks, G-fans, scattering diagrams,
//! theta functions, and verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 internal
//! invariant violation.

mod input;
mod render;
mod suites;

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use cluster_scatter::fan::build_g_fan;
use cluster_scatter::pattern::evaluate_walk;
use cluster_scatter::scattering::complete_rank2;
use cluster_scatter::theta::theta;
use cluster_scatter::Error as CoreError;

use input::JobSpec;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { code: 2, message: msg.into() }
    }

    pub fn verification(msg: impl Into<String>) -> Self {
        CliError { code: 1, message: msg.into() }
    }

    /// Classifies a core error: theorem violations are internal (exit 3),
    /// everything else is a usage problem (exit 2).
    pub fn internal(e: CoreError) -> Self {
        match e {
            CoreError::MixedSigns { .. }
            | CoreError::ZeroColumn { .. }
            | CoreError::InexactDivision(_) => CliError { code: 3, message: e.to_string() },
            other => CliError { code: 2, message: other.to_string() },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "cluster-scatter",
    about = "Exact cluster patterns and rank-2 scattering diagrams",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a walk: B_t, C_t, G_t, F-polynomials, cluster variables.
    Walk(JobArgs),
    /// Build the G-fan and report cones, rays, and completeness.
    Fan(JobArgs),
    /// Run the rank-2 consistent completion and list the walls.
    Scatter(JobArgs),
    /// Compute a theta function by broken-line enumeration.
    Theta(JobArgs),
    /// Run a verification suite (exit 1 on failure).
    Verify(VerifyArgs),
}

#[derive(Args)]
struct JobArgs {
    /// Job document path (JSON); stdin when omitted.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Exploration depth override.
    #[arg(long)]
    depth: Option<usize>,
    /// Truncation degree override (default 8).
    #[arg(long)]
    truncation: Option<i64>,
    /// Output format: text, json, or svg.
    #[arg(long, default_value = "text")]
    format: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name (or "all").
    suite: String,
    /// Seed for the random corpora.
    #[arg(long, default_value_t = 20260801)]
    seed: u64,
    /// Number of random cases per suite.
    #[arg(long, default_value_t = 100)]
    budget: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep clap's helpful message but pin the usage exit code
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            std::process::exit(if is_help { 0 } else { 2 });
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Walk(args) => {
            let spec = load_spec(&args)?;
            let b0 = spec.exchange_matrix()?;
            let walk = spec.walk()?;
            let p = evaluate_walk(&b0, &walk).map_err(CliError::internal)?;
            let reduced = walk.was_reduced();
            let text = match args.format.as_str() {
                "text" => render::walk_text(&p, reduced)?,
                "json" => render::walk_json(&p, reduced)?,
                other => return Err(CliError::usage(format!("format {other:?} not supported for walk"))),
            };
            emit(&args.out, &text)?;
            Ok(0)
        }
        Cmd::Fan(args) => {
            let spec = load_spec(&args)?;
            let b0 = spec.exchange_matrix()?;
            let depth = args.depth.or(spec.depth).unwrap_or(8);
            let fan = build_g_fan(&b0, depth).map_err(CliError::internal)?;
            let text = match args.format.as_str() {
                "text" => render::fan_text(&fan),
                "json" => render::fan_json(&fan),
                "svg" => {
                    if b0.n() != 2 {
                        // the report is still produced, on stderr
                        eprintln!("{}", render::fan_text(&fan));
                        return Err(CliError::usage("SVG rendering requires rank 2"));
                    }
                    render::fan_svg(&fan)?
                }
                other => return Err(CliError::usage(format!("unknown format {other:?}"))),
            };
            emit(&args.out, &text)?;
            Ok(0)
        }
        Cmd::Scatter(args) => {
            let spec = load_spec(&args)?;
            let b0 = spec.exchange_matrix()?;
            let ell = args.truncation.or(spec.truncation).unwrap_or(8);
            let d = complete_rank2(&b0, ell).map_err(CliError::internal)?;
            let text = match args.format.as_str() {
                "text" => render::scatter_text(&d),
                "json" => render::scatter_json(&d),
                "svg" => render::scatter_svg(&d)?,
                other => return Err(CliError::usage(format!("unknown format {other:?}"))),
            };
            emit(&args.out, &text)?;
            Ok(0)
        }
        Cmd::Theta(args) => {
            let spec = load_spec(&args)?;
            let b0 = spec.exchange_matrix()?;
            let ell = args.truncation.or(spec.truncation).unwrap_or(8);
            let m0 = spec
                .m0
                .clone()
                .ok_or_else(|| CliError::usage("theta requires \"m0\" in the job document"))?;
            let q = spec.point()?;
            let d = complete_rank2(&b0, ell).map_err(CliError::internal)?;
            let r = theta(&d, &m0, &q, ell).map_err(CliError::internal)?;
            let text = match args.format.as_str() {
                "text" => render::theta_text(&r),
                "json" => render::theta_json(&r),
                other => return Err(CliError::usage(format!("format {other:?} not supported for theta"))),
            };
            emit(&args.out, &text)?;
            Ok(0)
        }
        Cmd::Verify(args) => {
            let reports = suites::run_suite(&args.suite, args.seed, args.budget)?;
            let mut text = String::new();
            let mut all_ok = true;
            for r in &reports {
                text.push_str(&r.render());
                all_ok = all_ok && r.passed();
            }
            text.push_str(if all_ok { "verdict: PASS\n" } else { "verdict: FAIL\n" });
            emit(&args.out, &text)?;
            Ok(if all_ok { 0 } else { 1 })
        }
    }
}

fn load_spec(args: &JobArgs) -> Result<JobSpec, CliError> {
    let text = match &args.input {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::usage(format!("cannot read stdin: {e}")))?;
            buf
        }
    };
    JobSpec::parse(&text)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
