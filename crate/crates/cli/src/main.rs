//! `capsdp`: bounds for codes in spherical caps from the command line.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 when the solver
//! fails, 4 when a certificate or verification suite fails.

mod angle;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use capsdp::certify::{
    audit_text, bound_example1, bound_example2, certified_bound, DEFAULT_TOLERANCE,
};
use capsdp::codes::{dn_pole, dn_roots, e8_pole, e8_roots};
use capsdp::conic::{export_sdpa, SolverConfig};
use capsdp::harness::{
    kernel_reproduce_test, orthogonality_suite, positivity_sample_test, quadrature_suite,
};
use capsdp::relax::{build_cap_sdp_with, BuildOptions, CapParams, PolyBasis};
use capsdp::scalar::rational_to_string;
use capsdp::{Rational, Scalar};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use angle::{angle_name, parse_angle, Angle};

#[derive(Parser, Debug)]
#[command(
    name = "capsdp",
    version,
    about = "Semidefinite programming bounds for codes in spherical caps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Leave the timestamp out of JSON output.
    #[arg(long, global = true)]
    no_timestamp: bool,

    /// Solver log and audit on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
    Sdpa,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build, solve and verify the cap program.
    Bound(BoundArgs),
    /// Closed-form bounds of degree 1 and 2.
    Analytic(AnalyticArgs),
    /// Run a numerical verification suite.
    Verify(VerifyArgs),
    /// Root-system codes and their cap subcodes.
    Codes(CodesArgs),
    /// Write the cap program in SDPA sparse format.
    Export(ProgramArgs),
}

#[derive(Args, Debug, Clone)]
struct ProgramArgs {
    #[arg(long)]
    n: u32,
    /// Minimal angle, e.g. `pi/3`, or its cosine.
    #[arg(long, default_value = "pi/3")]
    theta: String,
    /// Cap angle, e.g. `pi/2`, or its cosine.
    #[arg(long, default_value = "pi/2")]
    phi: String,
    #[arg(long, default_value_t = 4)]
    d: u32,
    /// Degree of the polynomial constraints; defaults to `d`.
    #[arg(long = "N")]
    big_n: Option<u32>,
    /// Match only the u <-> v symmetric part of the trivariate identity.
    #[arg(long)]
    symmetry: bool,
    #[arg(long, value_enum, default_value_t = Basis::Monomial)]
    basis: Basis,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Basis {
    Monomial,
    Chebyshev,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[command(flatten)]
    program: ProgramArgs,
    /// Solver stopping tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Tolerance of the certificate checks.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    verify_tolerance: f64,
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// Print the `n | cos theta | cos phi | d | N | bound` row.
    #[arg(long)]
    summary: bool,
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    #[arg(long, value_parser = ["1", "2"])]
    example: String,
    /// Dimension; the degree-1 bound does not depend on it.
    #[arg(long, default_value_t = 3)]
    n: u32,
    #[arg(long, default_value = "pi/3")]
    theta: String,
    #[arg(long, default_value = "pi/2")]
    phi: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Orthogonality,
    Kernel,
    Positivity,
    Quadrature,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 20)]
    code_size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    E8,
    D3,
    D4,
    D5,
}

#[derive(Args, Debug)]
struct CodesArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Cap angle around the standard pole.
    #[arg(long, default_value = "pi/2")]
    cap: String,
}

enum Failure {
    Config(String),
    Solver(String),
    Certification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Certification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Certification(m) => m,
        }
    }
}

impl From<capsdp::Error> for Failure {
    fn from(e: capsdp::Error) -> Self {
        match e {
            capsdp::Error::Solver(m) => Failure::Solver(m),
            other => Failure::Config(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

/// Rendered output plus an optional failure to report after writing it.
struct Report {
    text: String,
    failure: Option<Failure>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|report| {
        write_output(&cli, &report.text)?;
        report.failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn write_output(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> CliResult<Report> {
    match &cli.command {
        Command::Bound(args) => bound(cli, args),
        Command::Analytic(args) => analytic(cli, args),
        Command::Verify(args) => verify(cli, args),
        Command::Codes(args) => codes(cli, args),
        Command::Export(args) => export(cli, args),
    }
}

fn format_of(cli: &Cli, default: Format, allowed: &[Format]) -> CliResult<Format> {
    let f = cli.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::Config(format!(
            "format {f:?} is not available for this command"
        )))
    }
}

fn angle_arg(name: &str, s: &str, notes: &mut Vec<String>) -> CliResult<Angle> {
    let a = parse_angle(s).map_err(|e| Failure::Config(format!("--{name}: {e}")))?;
    if let Some(note) = a.note() {
        eprintln!("warning: {note}");
        notes.push(note);
    }
    Ok(a)
}

/// Pretty JSON with a trailing newline; adds the timestamp unless
/// suppressed.
fn json_text(cli: &Cli, mut value: Value) -> String {
    if !cli.no_timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        value["timestamp"] = json!(secs);
    }
    let mut s = serde_json::to_string_pretty(&value).expect("json");
    s.push('\n');
    s
}

fn program(args: &ProgramArgs, notes: &mut Vec<String>) -> CliResult<(CapParams, BuildOptions)> {
    let theta = angle_arg("theta", &args.theta, notes)?;
    let phi = angle_arg("phi", &args.phi, notes)?;
    let params = CapParams::new(
        args.n,
        theta.cos,
        phi.cos,
        args.d,
        args.big_n.unwrap_or(args.d),
    )?;
    let poly_basis = match args.basis {
        Basis::Monomial => PolyBasis::Monomial,
        Basis::Chebyshev => PolyBasis::Chebyshev,
    };
    Ok((
        params,
        BuildOptions {
            symmetry_reduction: args.symmetry,
            multiplier_degree: None,
            poly_basis,
        },
    ))
}

fn bound(cli: &Cli, args: &BoundArgs) -> CliResult<Report> {
    let format = format_of(cli, Format::Table, &[Format::Table, Format::Json])?;
    let mut notes = Vec::new();
    let (params, options) = program(&args.program, &mut notes)?;
    let config = SolverConfig {
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        verbose: cli.verbose,
        ..SolverConfig::default()
    };
    let start = Instant::now();
    let run = certified_bound(&params, &options, &config, args.verify_tolerance)?;
    let cert = &run.certificate;
    if cli.verbose {
        eprint!("{}", audit_text(cert));
        eprintln!("elapsed {:.2?}", start.elapsed());
    }
    let failure = if !run.solution.status.is_usable() {
        Some(Failure::Solver(format!(
            "solver stopped with status {:?}: {}",
            run.solution.status, run.solution.message
        )))
    } else if !cert.is_verified() {
        Some(Failure::Certification(format!(
            "certificate failed: {}",
            cert.audit.failures.join("; ")
        )))
    } else {
        None
    };
    let row = if args.summary {
        cert.summary_row()
    } else {
        cert.table_row()
    };
    let text = match format {
        Format::Json => json_text(
            cli,
            json!({
                "command": "bound",
                "row": row,
                "precision_notes": notes,
                "solver": {
                    "status": run.solution.status,
                    "iterations": run.solution.iterations.len(),
                    "objective": run.solution.objective_value,
                    "dual_objective": run.solution.dual_objective,
                    "residuals": run.solution.residuals,
                    "message": run.solution.message,
                },
                "certificate": cert.to_json(),
            }),
        ),
        _ => format!("{row}\n"),
    };
    Ok(Report { text, failure })
}

fn rational_text(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{} ≈ {:.6}", rational_to_string(q), q.to_f64())
    }
}

fn analytic(cli: &Cli, args: &AnalyticArgs) -> CliResult<Report> {
    let format = format_of(cli, Format::Table, &[Format::Table, Format::Json])?;
    let mut notes = Vec::new();
    let theta = angle_arg("theta", &args.theta, &mut notes)?;
    let phi = angle_arg("phi", &args.phi, &mut notes)?;
    let inapplicable = |e: capsdp::Error| Failure::Config(e.to_string());
    let (bound, detail) = if args.example == "1" {
        let b = bound_example1(&theta.cos, &phi.cos).map_err(inapplicable)?;
        (b, Value::Null)
    } else {
        let e = bound_example2(args.n, &theta.cos, &phi.cos).map_err(inapplicable)?;
        (e.bound.clone(), e.to_json())
    };
    let text = match format {
        Format::Json => json_text(
            cli,
            json!({
                "command": "analytic",
                "example": args.example,
                "n": args.n,
                "cos_theta": rational_to_string(&theta.cos),
                "cos_phi": rational_to_string(&phi.cos),
                "bound": rational_to_string(&bound),
                "bound_f64": bound.to_f64(),
                "detail": detail,
                "precision_notes": notes,
            }),
        ),
        _ => format!("{}\n", rational_text(&bound)),
    };
    Ok(Report {
        text,
        failure: None,
    })
}

fn verify(cli: &Cli, args: &VerifyArgs) -> CliResult<Report> {
    let format = format_of(cli, Format::Json, &[Format::Table, Format::Json])?;
    let (value, line, pass) = match args.suite {
        Suite::Orthogonality => {
            let (n, d) = (args.n.unwrap_or(4), args.d.unwrap_or(3));
            let r = orthogonality_suite(n, d, args.seed)?;
            let pass = r.max_deviation <= 1e-9 && r.trace_deviation <= 1e-9;
            let line = format!(
                "orthogonality n={n} d={d}: max deviation {:.3e}, trace deviation {:.3e} (limit 1e-9)",
                r.max_deviation, r.trace_deviation
            );
            (json!(r), line, pass)
        }
        Suite::Kernel => {
            let (n, d) = (args.n.unwrap_or(4), args.d.unwrap_or(2));
            let r = kernel_reproduce_test(n, d, args.trials.unwrap_or(50), args.seed)?;
            let line = format!(
                "kernel n={n} d={d}, {} trials: max residual {:.3e} (limit 1e-8)",
                r.trials, r.max_residual
            );
            let pass = r.max_residual <= 1e-8;
            (json!(r), line, pass)
        }
        Suite::Positivity => {
            let (n, d) = (args.n.unwrap_or(3), args.d.unwrap_or(3));
            let r = positivity_sample_test(
                n,
                d,
                args.code_size,
                args.trials.unwrap_or(100),
                args.seed,
            )?;
            let line = format!(
                "positivity n={n} d={d}, {} codes of size {}: min eigenvalue {:.3e} (limit -1e-9)",
                r.trials, r.code_size, r.min_eigenvalue
            );
            let pass = r.min_eigenvalue >= -1e-9;
            (json!(r), line, pass)
        }
        Suite::Quadrature => {
            let ns: Vec<u32> = match args.n {
                Some(n) => vec![n],
                None => (3..=10).collect(),
            };
            let r = quadrature_suite(&ns, args.trials.unwrap_or(20), args.seed)?;
            let line = format!(
                "quadrature n={:?}: max mass error {:.3e} (limit 1e-13), node doubling change {:.3e}",
                ns, r.max_mass_error, r.max_doubling_change
            );
            let pass = r.max_mass_error <= 1e-13 && r.max_doubling_change <= 1e-10;
            (json!(r), line, pass)
        }
    };
    let status = if pass { "PASS" } else { "FAIL" };
    let text = match format {
        Format::Json => json_text(
            cli,
            json!({ "command": "verify", "suite": format!("{:?}", args.suite).to_lowercase(), "pass": pass, "report": value }),
        ),
        _ => format!("{status} {line}\n"),
    };
    let failure = (!pass).then(|| Failure::Certification(format!("suite failed: {line}")));
    Ok(Report { text, failure })
}

fn codes(cli: &Cli, args: &CodesArgs) -> CliResult<Report> {
    let format = format_of(cli, Format::Table, &[Format::Table, Format::Json])?;
    let mut notes = Vec::new();
    let cap = angle_arg("cap", &args.cap, &mut notes)?;
    let (name, code, pole) = match args.family {
        Family::E8 => ("e8", e8_roots(), e8_pole()),
        Family::D3 => ("d3", dn_roots(3)?, dn_pole(3)),
        Family::D4 => ("d4", dn_roots(4)?, dn_pole(4)),
        Family::D5 => ("d5", dn_roots(5)?, dn_pole(5)),
    };
    let sub = code.cap_subcode(&pole, &cap.cos)?;
    let min_angle = |c: &capsdp::ExactCode| c.max_inner_product().ok().map(|ip| angle_name(&ip));
    let full_angle = min_angle(&code).unwrap_or_else(|| "-".into());
    let cap_angle = min_angle(&sub);
    let dist = sub.distance_distribution()?;
    let text = match format {
        Format::Json => json_text(
            cli,
            json!({
                "command": "codes",
                "family": name,
                "dimension": code.dim(),
                "roots": code.len(),
                "cos_cap": rational_to_string(&cap.cos),
                "in_cap": sub.len(),
                "min_angle": full_angle,
                "min_angle_in_cap": cap_angle,
                "distance_distribution": {
                    "diagonal_sum": rational_to_string(&dist.diagonal_sum()),
                    "total": rational_to_string(&dist.total()),
                    "keys": dist.entries.len(),
                },
                "cap_code": sub.to_json(),
                "precision_notes": notes,
            }),
        ),
        _ => format!(
            "{} roots, {} in cap, min angle {}\n",
            code.len(),
            sub.len(),
            full_angle
        ),
    };
    Ok(Report {
        text,
        failure: None,
    })
}

fn export(cli: &Cli, args: &ProgramArgs) -> CliResult<Report> {
    let format = format_of(cli, Format::Sdpa, &[Format::Sdpa, Format::Json])?;
    let mut notes = Vec::new();
    let (params, options) = program(args, &mut notes)?;
    let problem = build_cap_sdp_with(&params, &options)?;
    let text = match format {
        Format::Json => json_text(
            cli,
            json!({ "command": "export", "params": params, "problem": problem.to_json() }),
        ),
        _ => export_sdpa(&problem),
    };
    Ok(Report {
        text,
        failure: None,
    })
}
