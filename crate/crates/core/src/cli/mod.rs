//! Command-line front end.
//!
//! Exit codes: `0` success, `1` usage or input errors, `2` analysis errors
//! (non-admissible input for the requested operation, unsupported group,
//! search limits, inconclusive verdicts).

pub mod json;
pub mod report;
pub mod spec;

use std::ffi::OsString;
use std::io::Read;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cyclic::{self, BranchAssignment, DEFAULT_K_MAX};
use crate::dual;
use crate::error::Error;
use crate::fractional::Tolerances;
use crate::measure::{GroupSpec, Measure, Rational};
use crate::scan;
use report::{AnalysisReport, ScanOptions};
use spec::SpecError;

#[derive(Debug, Parser)]
#[command(name = "partdiv", version, about = "Fractional convolution powers of discrete measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Emit canonical JSON.
    #[arg(long, global = true, conflicts_with = "text")]
    pub json: bool,
    /// Emit plain text (default).
    #[arg(long, global = true)]
    pub text: bool,
    #[arg(long, global = true, default_value_t = 3.0)]
    pub t_max: f64,
    #[arg(long, global = true, default_value_t = 8)]
    pub n_max: u64,
    #[arg(long, global = true, default_value_t = 0.05)]
    pub mesh: f64,
    /// Minimum dual grid size.
    #[arg(long, global = true, default_value_t = dual::DEFAULT_GRID)]
    pub grid: usize,
    /// Half-width of the sampled dual window on a real lattice.
    #[arg(long, global = true)]
    pub window: Option<f64>,
    /// Seed for the randomized self-check.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full analysis of a measure spec (`-` reads stdin).
    Analyze {
        spec: String,
        /// Also search for n-th roots.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Membership scan of `t ∈ (0, t_max]`.
    LambdaScan {
        spec: String,
        /// Branch shifts `k_1,...,k_{N-1}` of the logarithm on Z_N.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        branch: Option<Vec<i64>>,
    },
    /// All n-th convolution roots.
    Roots {
        spec: String,
        #[arg(long)]
        n: u64,
    },
    /// Winding number of a measure on the integers.
    Winding { spec: String },
    /// Lower bound from the zeros of the characteristic function.
    T0 { spec: String },
    /// Two-point measures on Z_2: closed form against root search.
    Z2 {
        spec: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Roots of the unit point mass on Z_N.
    Delta1 {
        #[arg(long)]
        modulus: u64,
        #[arg(long)]
        q: Rational,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Spec(SpecError),
    Io(String),
    Analysis(Error),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Spec(_) | Failure::Io(_) => 1,
            Failure::Analysis(e) => match e {
                Error::InvalidArgument(_)
                | Error::BadGridSize(_)
                | Error::InvalidGroup(_)
                | Error::NegativeWeight { .. }
                | Error::MassNotOne { .. }
                | Error::PointOutOfRange { .. }
                | Error::EmptySupport => 1,
                _ => 2,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Spec(SpecError::Parse { .. }) => "ParseError",
            Failure::Spec(SpecError::Validation(_)) => "ValidationError",
            Failure::Io(_) => "IoError",
            Failure::Analysis(e) => e.kind(),
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Spec(e) => e.to_string(),
            Failure::Io(m) => m.clone(),
            Failure::Analysis(e) => e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Analysis(e)
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    violations: Vec<String>,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

/// Runs the tool on `args` (including the program name), reading `-`
/// specs from `stdin`.
pub fn execute<I, T>(args: I, stdin: &mut dyn Read) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let wants_json = args.iter().any(|a| a == "--json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Execution {
                    code: 1,
                    stdout: if wants_json {
                        error_json("UsageError", rendered.trim().to_string(), 1, Vec::new())
                    } else {
                        String::new()
                    },
                    stderr: rendered,
                }
            } else {
                Execution {
                    code: 0,
                    stdout: rendered,
                    stderr: String::new(),
                }
            };
        }
    };
    let json = cli.global.json;
    match dispatch(&cli, stdin) {
        Ok(report) => Execution {
            code: 0,
            stdout: render(&report, json),
            stderr: String::new(),
        },
        Err(f) => {
            let code = f.exit_code();
            let message = f.message();
            let violations = match &f {
                Failure::Spec(SpecError::Validation(v)) => v.clone(),
                _ => Vec::new(),
            };
            Execution {
                code,
                stdout: if json {
                    error_json(f.kind(), message.clone(), code, violations)
                } else {
                    String::new()
                },
                stderr: format!("error: {message}\n"),
            }
        }
    }
}

fn error_json(kind: &str, message: String, exit_code: i32, violations: Vec<String>) -> String {
    let doc = ErrorDoc {
        error: ErrorBody {
            kind,
            message,
            exit_code,
            violations,
        },
    };
    format!("{}\n", json::to_canonical_json(&doc))
}

fn render(report: &AnalysisReport, as_json: bool) -> String {
    if as_json {
        format!("{}\n", json::to_canonical_json(report))
    } else {
        let value = serde_json::to_value(report).expect("report types serialize infallibly");
        json::to_text(&value)
    }
}

fn load_measure(path: &str, stdin: &mut dyn Read) -> Result<Measure, Failure> {
    let mut bytes = Vec::new();
    if path == "-" {
        stdin
            .read_to_end(&mut bytes)
            .map_err(|e| Failure::Io(format!("reading stdin: {e}")))?;
    } else {
        bytes = std::fs::read(path).map_err(|e| Failure::Io(format!("{path}: {e}")))?;
    }
    let spec = spec::parse_spec(&bytes).map_err(Failure::Spec)?;
    Ok(spec.to_measure()?)
}

fn options(g: &GlobalArgs) -> ScanOptions {
    ScanOptions {
        t_max: g.t_max,
        n_max: g.n_max,
        mesh: g.mesh,
        grid: g.grid,
        window: g.window,
        seed: g.seed,
    }
}

fn dispatch(cli: &Cli, stdin: &mut dyn Read) -> Result<AnalysisReport, Failure> {
    let opts = options(&cli.global);
    match &cli.command {
        Command::Analyze { spec, n } => {
            let mu = load_measure(spec, stdin)?;
            analyze(&mu, &opts, *n)
        }
        Command::LambdaScan { spec, branch } => {
            let mu = load_measure(spec, stdin)?;
            lambda_scan(&mu, &opts, branch.as_deref())
        }
        Command::Roots { spec, n } => {
            let mu = load_measure(spec, stdin)?;
            let sc = dual::second_characteristic(&mu, opts.grid, opts.window)?;
            let mut r = AnalysisReport::new("roots", Some(&mu));
            r.roots = Some(report::roots_section(&mu, &sc, *n)?);
            Ok(r)
        }
        Command::Winding { spec } => {
            let mu = load_measure(spec, stdin)?;
            let w = dual::winding_number(&mu)?;
            let constraints = scan::winding_constraints(w);
            let mut r = AnalysisReport::new("winding", Some(&mu));
            r.winding = Some(report::WindingSection {
                winding: w,
                statement: report::winding_statement(&constraints),
                constraints,
            });
            Ok(r)
        }
        Command::T0 { spec } => {
            let mu = load_measure(spec, stdin)?;
            if let GroupSpec::Cyclic { .. } = mu.group() {
                return Err(Error::UnsupportedGroup(
                    "t0 needs a connected dual group; use analyze for cyclic groups".into(),
                )
                .into());
            }
            let zeros = dual::find_zeros(&mu, dual::ZERO_TOL)?;
            if zeros.is_empty() {
                return Err(Error::NoZeros.into());
            }
            let (t0, statement) = report::t0_section(&mu, &zeros)?;
            let mut r = AnalysisReport::new("t0", Some(&mu));
            r.constraints = Some(report::ConstraintsSection {
                winding: None,
                t0: Some(t0),
                statement,
            });
            Ok(r)
        }
        Command::Z2 { spec, alpha, n } => {
            let alpha = match (spec, alpha) {
                (Some(_), Some(_)) => {
                    return Err(Error::InvalidArgument(
                        "give either a spec or --alpha, not both".into(),
                    )
                    .into())
                }
                (Some(path), None) => {
                    let mu = load_measure(path, stdin)?;
                    if mu.group() != (GroupSpec::Cyclic { order: 2 }) {
                        return Err(Error::WrongGroup.into());
                    }
                    mu.weight(0)
                }
                (None, Some(a)) => *a,
                (None, None) => {
                    return Err(Error::InvalidArgument("a spec or --alpha is required".into()).into())
                }
            };
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::InvalidArgument(format!("--alpha must lie in [0, 1], got {alpha}")).into());
            }
            let ns: Vec<u64> = match n {
                Some(n) => vec![*n],
                None => (1..=cyclic::MAX_ROOT_DEGREE).collect(),
            };
            let mut r = AnalysisReport::new("z2", None);
            r.z2 = Some(report::z2_section(alpha, &ns)?);
            Ok(r)
        }
        Command::Delta1 { modulus, q } => {
            let d = cyclic::delta1_membership(*modulus, *q)?;
            let mut r = AnalysisReport::new("delta1", None);
            r.delta1 = Some(report::delta1_section(&d));
            Ok(r)
        }
    }
}

fn analyze(mu: &Measure, opts: &ScanOptions, n: Option<u64>) -> Result<AnalysisReport, Failure> {
    let mut r = AnalysisReport::new("analyze", Some(mu));
    let sc = dual::second_characteristic(mu, opts.grid, opts.window)?;
    r.admissibility = Some(report::admissibility_section(mu, &sc));
    if sc.admissible {
        let grid = scan::build_t_grid(opts.t_max, opts.n_max, opts.mesh)?;
        match scan::lambda_scan_grid(mu, grid, opts.grid, Tolerances::default()) {
            Ok(rep) => r.lambda = Some(report::lambda_section(&rep, opts, None)),
            Err(Error::UnsupportedGroup(msg)) => r.notes.push(format!("lambda scan skipped: {msg}")),
            Err(e) => return Err(e.into()),
        }
    } else {
        r.constraints = report::constraints_section(mu, &sc, &mut r.notes)?;
    }
    if let Some(n) = n {
        r.roots = Some(report::roots_section(mu, &sc, n)?);
    }
    if let GroupSpec::Cyclic { .. } = mu.group() {
        r.cyclic = Some(report::cyclic_section(mu)?);
    }
    r.self_check = Some(report::self_check(mu, opts.seed)?);
    Ok(r)
}

fn lambda_scan(
    mu: &Measure,
    opts: &ScanOptions,
    branch: Option<&[i64]>,
) -> Result<AnalysisReport, Failure> {
    let grid = scan::build_t_grid(opts.t_max, opts.n_max, opts.mesh)?;
    let mut r = AnalysisReport::new("lambda-scan", Some(mu));
    let rep = match branch {
        Some(k) => {
            let GroupSpec::Cyclic { .. } = mu.group() else {
                return Err(Error::WrongGroup.into());
            };
            let full: Vec<i64> = std::iter::once(0).chain(k.iter().copied()).collect();
            let k = BranchAssignment::new(full, DEFAULT_K_MAX)?;
            cyclic::lambda_k_scan(mu, &k, &grid)?
        }
        None => scan::lambda_scan_grid(mu, grid, opts.grid, Tolerances::default())?,
    };
    r.lambda = Some(report::lambda_section(&rep, opts, branch.map(<[i64]>::to_vec)));
    Ok(r)
}

/// Process entry point; honours `PARTDIV_THREADS` for the worker pool size.
pub fn main_entry() -> i32 {
    if let Some(n) = std::env::var("PARTDIV_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = execute(std::env::args_os(), &mut std::io::stdin().lock());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}
