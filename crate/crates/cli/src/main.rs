//! `mixinv`: mixed-consistency generalized inverses from the command line.
//!
//! Exit status is 0 on success, 1 when a computation fails or the
//! verification suite reports failures, and 2 for usage, input and I/O
//! errors.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mixinv::kernels::{fcf, uc_scale, DEFAULT_DEP_TOL, DEFAULT_MAX_SWEEPS, DEFAULT_SCALE_TOL};
use mixinv::matrix::{format_matrix, parse_matrix};
use mixinv::mixed::{mixed_inverse, Method};
use mixinv::verify::{run_suite, Family, SuiteConfig};
use mixinv::{BlockSpec, DenseMatrix, GinvError};

#[derive(Parser)]
#[command(
    name = "mixinv",
    version,
    about = "Mixed-consistency generalized inverses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a block-partitioned mixed inverse.
    Invert(InvertArgs),
    /// Show the unit-consistent scaling D·M·E of a matrix.
    Scale(ScaleArgs),
    /// Frobenius canonical form M = F·C·F⁻¹.
    Fcf(FcfArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct InvertArgs {
    #[arg(long, value_name = "PATH")]
    matrix: PathBuf,
    /// Diagonal blocks as size:kind pairs, e.g. "3:mp,3:uc,3:mp".
    #[arg(long, value_name = "SPEC")]
    blocks: String,
    #[arg(long, value_enum, default_value = "fold")]
    method: MethodArg,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Significant digits per entry.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u32).range(1..=17))]
    precision: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dual,
    Explicit,
    Recursive,
    Fold,
}

impl MethodArg {
    fn method(self) -> Method {
        match self {
            MethodArg::Dual => Method::Dual,
            MethodArg::Explicit => Method::TripleExplicit,
            MethodArg::Recursive => Method::TripleRecursive,
            MethodArg::Fold => Method::KFold,
        }
    }

    fn required_blocks(self) -> Option<usize> {
        match self {
            MethodArg::Dual => Some(2),
            MethodArg::Explicit | MethodArg::Recursive => Some(3),
            MethodArg::Fold => None,
        }
    }
}

#[derive(Args)]
struct ScaleArgs {
    #[arg(long, value_name = "PATH")]
    matrix: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SCALE_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
    max_sweeps: usize,
}

#[derive(Args)]
struct FcfArgs {
    #[arg(long, value_name = "PATH")]
    matrix: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DEP_TOL)]
    dep_tol: f64,
    /// Write the chain basis F here.
    #[arg(long, value_name = "PATH")]
    f_out: Option<PathBuf>,
    /// Write the canonical form C here.
    #[arg(long, value_name = "PATH")]
    c_out: Option<PathBuf>,
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u32).range(1..=17))]
    precision: u32,
}

#[derive(Args)]
struct VerifyArgs {
    /// Base seed; case i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated families to run; all when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    families: Vec<Family>,
    /// Cases per family instead of the defaults.
    #[arg(long)]
    count: Option<usize>,
    /// Write the JSON report here.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Assert the similarity-consistency cases instead of recording them.
    #[arg(long)]
    promote_sc: bool,
    /// Residual a negative control must exceed to count as detected.
    #[arg(long)]
    negative_floor: Option<f64>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: GinvError| e.to_string())
}

/// A failed command: message plus exit status.
struct Failure {
    status: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Display) -> Self {
        Failure {
            status: 2,
            message: message.to_string(),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Failure::usage(format!("{}: {err}", path.display()))
    }
}

impl From<GinvError> for Failure {
    fn from(e: GinvError) -> Self {
        let status = match e {
            GinvError::Input(_) | GinvError::Parse { .. } => 2,
            _ => 1,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn read_matrix(path: &Path) -> Result<DenseMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    parse_matrix(&text).map_err(|e| Failure {
        status: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn invert(args: InvertArgs) -> CmdResult {
    let spec: BlockSpec = args.blocks.parse()?;
    if let Some(n) = args.method.required_blocks() {
        if spec.len() != n {
            return Err(Failure::usage(format!(
                "method {} needs {n} blocks, got {}",
                args.method.method().name(),
                spec.len()
            )));
        }
    }
    let m = read_matrix(&args.matrix)?;
    if !m.is_square() {
        return Err(Failure::usage(format!(
            "matrix must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    spec.check_dim(m.rows())?;
    let result = mixed_inverse(&m, &spec, args.method.method())?;
    let text = format_matrix(&result.value, args.precision as usize);
    match args.out {
        Some(path) => write_text(&path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn scale(args: ScaleArgs) -> CmdResult {
    let m = read_matrix(&args.matrix)?;
    let sd = uc_scale(&m, args.tol, args.max_sweeps)?;
    println!("D: {}", join(&sd.left));
    println!("E: {}", join(&sd.right));
    println!("sweeps: {}", sd.sweeps);
    println!("residual: {:e}", sd.residual);
    Ok(0)
}

fn frobenius(args: FcfArgs) -> CmdResult {
    let m = read_matrix(&args.matrix)?;
    if !m.is_square() {
        return Err(Failure::usage(format!(
            "matrix must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let d = fcf(&m, args.dep_tol)?;
    println!("degrees: {:?}", d.degrees);
    let digits = args.precision as usize;
    if let Some(path) = args.f_out {
        write_text(&path, &format_matrix(&d.f, digits))?;
    }
    if let Some(path) = args.c_out {
        write_text(&path, &format_matrix(&d.c, digits))?;
    }
    Ok(0)
}

fn verify(args: VerifyArgs) -> CmdResult {
    let mut config = SuiteConfig {
        base_seed: args.seed,
        promote_sc: args.promote_sc,
        ..SuiteConfig::default()
    };
    if !args.families.is_empty() {
        config.families = args.families;
    }
    if let Some(n) = args.count {
        config.counts = config.families.iter().map(|&f| (f, n)).collect();
    }
    if let Some(floor) = args.negative_floor {
        config.thresholds.negative_floor = floor;
    }
    config.validate()?;
    let report = run_suite(&config)?;
    if let Some(path) = &args.report {
        write_text(path, &report.to_json())?;
    }
    for t in &report.timings {
        let cases = report
            .cases
            .iter()
            .filter(|c| c.case_id.starts_with(t.family.name()));
        let failed = cases.filter(|c| c.passed == Some(false)).count();
        println!(
            "{:<24} {:>5} cases  {:>4} failed  {:.3}s",
            t.family.name(),
            t.cases,
            failed,
            t.seconds
        );
    }
    let s = &report.summary;
    println!(
        "asserted {}/{} passed, {} recorded, {} errored, controls detected {}/{}",
        s.passed, s.asserted, s.recorded, s.errored, s.controls_detected, s.controls
    );
    for c in report.failures().take(20) {
        match (&c.residual, &c.error) {
            (Some(r), _) => println!("FAIL {} residual {r:.3e}", c.case_id),
            (None, Some(e)) => println!("FAIL {} error {e}", c.case_id),
            (None, None) => println!("FAIL {}", c.case_id),
        }
    }
    println!("content hash {}", report.content_hash);
    Ok(report.exit_status() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Invert(a) => invert(a),
        Command::Scale(a) => scale(a),
        Command::Fcf(a) => frobenius(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(status) => ExitCode::from(status),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.status)
        }
    }
}
