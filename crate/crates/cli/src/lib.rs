//! Command-line front end: reads a JSON problem, runs a checker, the
//! falsifier or a tangent-cone query and writes a JSON report.

pub mod expr;
pub mod problem;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};

use nagumo_core::checkers::{check, check_nonlinear_sampled, check_orthant_linear, CheckError, CheckOptions, Decision, DynamicalSystem, Verdict};
use nagumo_core::dynamics::{falsify, DynamicsError, FalsifyOptions};
use nagumo_core::sets::{Membership, SetError};
use nagumo_core::tangent::tangent_at;

use problem::{Domain, InputError, Model, OptionsSpec, ProblemFile, ResolvedOptions, SystemKind};
use report::{
    exit_code, ErrorKind, ErrorReport, Falsification, Phase, Report, SetInfo, TangentReport, EXIT_INPUT,
};

#[derive(Debug, Parser)]
#[command(name = "nagumo", version, about = "Positive invariance of convex sets under ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether the set is positively invariant.
    Check { file: PathBuf },
    /// Search for trajectories that leave the set.
    Falsify { file: PathBuf },
    /// Print the tangent cone at a boundary point, given as a JSON array.
    Tangent { file: PathBuf, point: String },
    /// Print the tool version.
    Version,
}

#[derive(Debug, Args)]
struct Flags {
    /// Boundary band and tangent-cone tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Boundary samples for sampled checks.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Falsification start points.
    #[arg(long, global = true)]
    starts: Option<usize>,
    /// Leave timing out of the report.
    #[arg(long, global = true)]
    no_timing: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

impl Flags {
    fn as_options(&self) -> OptionsSpec {
        OptionsSpec {
            tolerance: self.tolerance,
            seed: self.seed,
            n_samples: self.samples,
            horizon: self.horizon,
            step: self.step,
            n_starts: self.starts,
            ..Default::default()
        }
    }
}

/// Failure of a command, before or after a report could be built.
#[derive(Debug)]
enum Failure {
    Input(InputError),
    NotOnBoundary(String),
    Numerical(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<CheckError> for Failure {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::EmptySet | CheckError::Dimension(_) => Failure::Input(InputError::new("set", e)),
            CheckError::Set(s) => from_set_error(s),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidGrid(_) => Failure::Input(InputError::new("options", e)),
            DynamicsError::Dimension(_) => Failure::Input(InputError::new("system", e)),
            DynamicsError::Set(s) => from_set_error(s),
            DynamicsError::Numerics(n) => Failure::Numerical(n.to_string()),
        }
    }
}

fn from_set_error(e: SetError) -> Failure {
    match e {
        SetError::EmptyBoundary | SetError::Invalid(_) | SetError::DimensionMismatch { .. } => {
            Failure::Input(InputError::new("set", e))
        }
        other => Failure::Numerical(other.to_string()),
    }
}

impl Failure {
    fn report(self) -> ErrorReport {
        match self {
            Failure::Input(e) => ErrorReport::new(ErrorKind::Input, Some(e.path), e.message),
            Failure::NotOnBoundary(m) => ErrorReport::new(ErrorKind::NotOnBoundary, Some("point".into()), m),
            Failure::Numerical(m) => ErrorReport::new(ErrorKind::Numerical, None, m),
        }
    }
}

struct Outcome {
    report: Report,
    code: i32,
    summary: String,
}

struct Clock {
    enabled: bool,
    phases: Vec<Phase>,
    last: Instant,
}

impl Clock {
    fn new(enabled: bool) -> Self {
        Self {
            enabled,
            phases: Vec::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.phases.push(Phase {
            name: name.into(),
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }

    fn finish(self) -> Option<Vec<Phase>> {
        self.enabled.then_some(self.phases)
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_INPUT
                }
            };
        }
    };

    if let Command::Version = cli.command {
        let _ = writeln!(stdout, "nagumo {}", env!("CARGO_PKG_VERSION"));
        return 0;
    }

    match execute(&cli) {
        Ok(outcome) => {
            let text = to_json(&outcome.report);
            if let Err(e) = emit(&cli.flags, &text, stdout) {
                let _ = writeln!(stderr, "error: cannot write report: {e}");
                return EXIT_INPUT;
            }
            let _ = writeln!(stderr, "{}", outcome.summary);
            outcome.code
        }
        Err(failure) => {
            let report = failure.report();
            let code = report.error.exit_code;
            let _ = writeln!(stdout, "{}", to_json(&report));
            let path = report.error.path.as_deref().map(|p| format!("{p}: ")).unwrap_or_default();
            let _ = writeln!(stderr, "error: {path}{}", report.error.message);
            code
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn emit(flags: &Flags, text: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match &flags.output {
        Some(path) => fs::write(path, format!("{text}\n")),
        None => writeln!(stdout, "{text}"),
    }
}

fn load(file: &PathBuf, flags: &Flags) -> Result<(Model, ResolvedOptions), Failure> {
    let text = fs::read_to_string(file)
        .map_err(|e| InputError::new("(file)", format!("cannot read {}: {e}", file.display())))?;
    let problem = ProblemFile::from_json(&text)?;
    let model = problem.build()?;
    let mut options = ResolvedOptions::default();
    options.apply(&problem.options);
    options.apply(&flags.as_options());
    options.validate()?;
    Ok((model, options))
}

fn require_system(model: &Model) -> Result<(SystemKind, &DynamicalSystem), Failure> {
    model
        .system
        .as_ref()
        .map(|(k, s)| (*k, s))
        .ok_or_else(|| Failure::Input(InputError::new("system", "this command needs a system")))
}

fn check_options(o: &ResolvedOptions) -> CheckOptions {
    CheckOptions {
        t0: o.t0,
        n_samples: o.n_samples,
        seed: o.seed,
        tolerances: o.tolerances,
    }
}

fn falsify_options(o: &ResolvedOptions) -> FalsifyOptions {
    FalsifyOptions {
        n_starts: o.n_starts,
        horizon: o.horizon,
        step: o.step,
        seed: o.seed,
        t0: o.t0,
        tolerances: o.tolerances,
    }
}

fn set_info(domain: &Domain) -> SetInfo {
    SetInfo {
        family: domain.family().into(),
        dim: domain.dim(),
    }
}

fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let mut clock = Clock::new(!cli.flags.no_timing);
    let mut outcome = match &cli.command {
        Command::Check { file } => {
            let (model, options) = load(file, &cli.flags)?;
            clock.lap("parse");
            cmd_check(&model, options, &mut clock)?
        }
        Command::Falsify { file } => {
            let (model, options) = load(file, &cli.flags)?;
            clock.lap("parse");
            let outcome = cmd_falsify(&model, options)?;
            clock.lap("falsify");
            outcome
        }
        Command::Tangent { file, point } => {
            let (model, options) = load(file, &cli.flags)?;
            clock.lap("parse");
            let outcome = cmd_tangent(&model, options, point)?;
            clock.lap("tangent");
            outcome
        }
        Command::Version => unreachable!("handled before dispatch"),
    };
    outcome.report.timing = clock.finish();
    Ok(outcome)
}

fn verdict_summary(model: &Model, kind: SystemKind, v: &Verdict) -> String {
    let system = match kind {
        SystemKind::Linear => "linear system",
        SystemKind::Expression => "expression system",
    };
    let decision = match v.decision {
        Decision::Invariant => "invariant",
        Decision::NotInvariant => "not invariant",
        Decision::Unknown => "unknown",
    };
    let mut s = format!(
        "check: {decision} ({} in R^{}, {system})",
        model.domain.family(),
        model.domain.dim()
    );
    if let Some(c) = &v.counterexample {
        s.push_str(&format!("\n  counterexample {:?}, violation {:e}", c.point, c.violation));
    }
    for w in &v.warnings {
        s.push_str(&format!("\n  warning: {w}"));
    }
    s
}

fn cmd_check(model: &Model, options: ResolvedOptions, clock: &mut Clock) -> Result<Outcome, Failure> {
    let (kind, sys) = require_system(model)?;
    let copts = check_options(&options);
    let mut report = Report::new("check", set_info(&model.domain), options);
    report.system = Some(kind);

    let verdict = match kind {
        SystemKind::Linear => {
            let v = match &model.domain {
                Domain::Orthant(_) => check_orthant_linear(sys.matrix().expect("linear system"), &options.tolerances)?,
                Domain::Set(set) => check(set, sys, &copts)?,
            };
            clock.lap("check");
            v
        }
        SystemKind::Expression => {
            let set = model.domain.to_set();
            let sampled = check_nonlinear_sampled(&set, sys, &copts)?;
            clock.lap("check");
            if sampled.decision == Decision::NotInvariant {
                sampled
            } else {
                let fopts = falsify_options(&options);
                let exit = falsify(&set, sys, &fopts)?;
                clock.lap("falsify");
                let verdict = match &exit {
                    Some(e) => Verdict::not_invariant(e.x0.clone(), e.excess).with_warning(format!(
                        "witnessed by simulation: the trajectory from this start leaves the set at t = {}",
                        e.t_exit
                    )),
                    None => sampled,
                };
                report.falsification = Some(Falsification {
                    n_starts: fopts.n_starts,
                    horizon: fopts.horizon,
                    step: fopts.step,
                    seed: fopts.seed,
                    exit,
                });
                verdict
            }
        }
    };

    let summary = verdict_summary(model, kind, &verdict);
    let code = exit_code(verdict.decision);
    report.decision = Some(verdict.decision);
    report.verdict = Some(verdict);
    Ok(Outcome { report, code, summary })
}

fn cmd_falsify(model: &Model, options: ResolvedOptions) -> Result<Outcome, Failure> {
    let (kind, sys) = require_system(model)?;
    let set = model.domain.to_set();
    let fopts = falsify_options(&options);
    let exit = falsify(&set, sys, &fopts)?;
    let (code, summary) = match &exit {
        Some(e) => (
            1,
            format!(
                "falsify: exit found from start {} at {:?}, t = {}, excess {:e}",
                e.start_index, e.x0, e.t_exit, e.excess
            ),
        ),
        None => (
            0,
            format!(
                "falsify: no exit found from {} starts over horizon {}",
                fopts.n_starts, fopts.horizon
            ),
        ),
    };
    let mut report = Report::new("falsify", set_info(&model.domain), options);
    report.system = Some(kind);
    report.falsification = Some(Falsification {
        n_starts: fopts.n_starts,
        horizon: fopts.horizon,
        step: fopts.step,
        seed: fopts.seed,
        exit,
    });
    Ok(Outcome { report, code, summary })
}

fn cmd_tangent(model: &Model, options: ResolvedOptions, point: &str) -> Result<Outcome, Failure> {
    let x: Vec<f64> = serde_json::from_str(point)
        .map_err(|e| InputError::new("point", format!("expected a JSON array of numbers: {e}")))?;
    let dim = model.domain.dim();
    if x.len() != dim {
        return Err(InputError::new("point", format!("expected {dim} coordinates, got {}", x.len())).into());
    }
    let set = model.domain.to_set();
    let band = options.tolerances.boundary;
    let membership = set.membership_with(&x, band).map_err(from_set_error)?;
    if membership != Membership::Boundary {
        let place = if membership == Membership::Inside { "inside" } else { "outside" };
        return Err(Failure::NotOnBoundary(format!("point {x:?} lies {place} the set, not on its boundary")));
    }
    let bp = set.boundary_point_with(&x, band).map_err(from_set_error)?;
    let cone = tangent_at(&set, &bp).map_err(|e| Failure::Numerical(e.to_string()))?;
    let summary = format!("tangent: cone at {x:?} computed ({} in R^{dim})", model.domain.family());
    let mut report = Report::new("tangent", set_info(&model.domain), options);
    report.tangent = Some(TangentReport {
        point: x,
        tag: bp.tag,
        cone,
    });
    Ok(Outcome { report, code: 0, summary })
}
