//! Command-line front end. Every command writes one payload (JSON envelope or
//! CSV table) to stdout or `--out`; diagnostics go to stderr.
//!
//! Exit codes: 0 on success, 2 for invalid flags or inputs, 3 when a
//! computation fails.

pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::el_points::{self, ElError};
use crate::euler_family::{self, EulerSolution, FamilyError};
use crate::lagrange::{self, LagrangeError};
use crate::numerics::RootConfig;
use crate::verify::{self, BodyState, ResidualReport, VerifyError};
use output::{to_csv, to_json, Cell, OutputEnvelope};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "euler-lagrange",
    version,
    about = "Euler collinear solutions, Lagrange points and their four-body equilibria"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output format; tables default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the payload here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Absolute residual tolerance for root finding.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Suppress the timing line on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the radius relation r3 = f(r2).
    Family(FamilyArgs),
    /// One Euler solution ES(r2, m3).
    Es(EsArgs),
    /// Lagrange points of primaries at (1, 0) and (-x, 0).
    Lagrange(LagrangeArgs),
    /// The six equilibria of a massless body added to ES(r2, m3).
    El(EsArgs),
    /// The curve q3 = q4 through L4(r2).
    Curve(CurveArgs),
    /// The branch G(w) with G(0) = 0 parametrizing the family.
    Param(ParamArgs),
    /// Residual checks and optional direct integration.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct FamilyArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub r2_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub r2_max: f64,
    #[arg(long, default_value_t = 301)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub r2: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub m3: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct LagrangeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub r2: f64,
    /// Spacing between samples.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ParamArgs {
    /// A single w; overrides the range.
    #[arg(long, conflicts_with_all = ["w_min", "w_max", "samples"], allow_negative_numbers = true)]
    pub w: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub w_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub w_max: f64,
    #[arg(long, default_value_t = 301)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(
        long,
        required_unless_present = "from_json",
        allow_negative_numbers = true
    )]
    pub r2: Option<f64>,
    #[arg(
        long,
        required_unless_present = "from_json",
        allow_negative_numbers = true
    )]
    pub m3: Option<f64>,
    /// Read the solution from JSON written by `es` (`-` for stdin).
    #[arg(long, conflicts_with_all = ["r2", "m3"])]
    pub from_json: Option<PathBuf>,
    /// Probe position; both coordinates are required together.
    #[arg(long, requires = "r5", allow_negative_numbers = true)]
    pub r4: Option<f64>,
    #[arg(long, requires = "r4", allow_negative_numbers = true)]
    pub r5: Option<f64>,
    /// Integrate the bodies (and the probe, if any) in the inertial frame.
    #[arg(long)]
    pub integrate: bool,
    #[arg(long, default_value_t = 1, requires = "integrate")]
    pub periods: u32,
    /// Steps per period; the step is 2π / dt_div.
    #[arg(long, default_value_t = 4096, requires = "integrate")]
    pub dt_div: u32,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::MassOutOfRange { .. } | FamilyError::OutOfRange { .. } => {
                usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<LagrangeError> for CliError {
    fn from(e: LagrangeError) -> Self {
        match e {
            LagrangeError::OutOfRange(_) => usage(e.to_string()),
            LagrangeError::Family(inner) => inner.into(),
            LagrangeError::Verify(inner) => inner.into(),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Collision { .. } | VerifyError::InvalidInput(_) => usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ElError> for CliError {
    fn from(e: ElError) -> Self {
        match e {
            ElError::MassNotInterior { .. } | ElError::InvalidR2(_) => usage(e.to_string()),
            ElError::Family(inner) => inner.into(),
            ElError::Lagrange(inner) => inner.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numerical(format!("serialization failed: {e}"))
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let start = Instant::now();
    let name = command_name(&cli.command);
    let result = execute(&cli).and_then(|payload| emit(&cli.global, &payload));
    match result {
        Ok(()) => {
            if !cli.global.quiet {
                eprintln!(
                    "{name}: done in {:.1} ms",
                    start.elapsed().as_secs_f64() * 1e3
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Family(_) => "family",
        Command::Es(_) => "es",
        Command::Lagrange(_) => "lagrange",
        Command::El(_) => "el",
        Command::Curve(_) => "curve",
        Command::Param(_) => "param",
        Command::Verify(_) => "verify",
    }
}

fn emit(global: &GlobalOpts, payload: &str) -> Result<(), CliError> {
    match &global.out {
        Some(path) => fs::write(path, payload)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(payload.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| CliError::Numerical(format!("cannot write to stdout: {e}")))
        }
    }
}

fn root_config(global: &GlobalOpts) -> Result<RootConfig, CliError> {
    let cfg = match global.tol {
        Some(t) => RootConfig::default().with_abs_tol(t),
        None => RootConfig::default(),
    };
    cfg.validate().map_err(|e| usage(format!("--tol: {e}")))?;
    Ok(cfg)
}

/// Resolves the output format; `table` commands accept both.
fn format(global: &GlobalOpts, table: bool) -> Result<Format, CliError> {
    match (global.format, table) {
        (None, true) => Ok(Format::Csv),
        (None, false) | (Some(Format::Json), _) => Ok(Format::Json),
        (Some(Format::Csv), true) => Ok(Format::Csv),
        (Some(Format::Csv), false) => Err(usage("this command only emits json")),
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be finite")))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

fn check_range(lo_name: &str, lo: f64, hi: f64, samples: usize) -> Result<(), CliError> {
    finite(lo_name, lo)?;
    finite(lo_name, hi)?;
    if !(lo < hi) {
        return Err(usage(format!("need {lo_name} < max, got {lo} and {hi}")));
    }
    if samples < 2 {
        return Err(usage("--samples must be at least 2"));
    }
    Ok(())
}

#[derive(Serialize)]
struct Inputs<'a, A: Serialize> {
    #[serde(flatten)]
    args: &'a A,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

fn envelope<'a, A: Serialize, R: Serialize>(
    command: &'static str,
    args: &'a A,
    global: &GlobalOpts,
    results: R,
) -> OutputEnvelope<Inputs<'a, A>, R> {
    OutputEnvelope::new(
        command,
        Inputs {
            args,
            tol: global.tol,
        },
        results,
    )
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let g = &cli.global;
    let cfg = root_config(g)?;
    match &cli.command {
        Command::Family(a) => cmd_family(a, g, &cfg),
        Command::Es(a) => cmd_es(a, g),
        Command::Lagrange(a) => cmd_lagrange(a, g),
        Command::El(a) => cmd_el(a, g, &cfg),
        Command::Curve(a) => cmd_curve(a, g, &cfg),
        Command::Param(a) => cmd_param(a, g),
        Command::Verify(a) => cmd_verify(a, g),
    }
}

#[derive(Serialize)]
struct FamilyRow {
    r2: f64,
    r3: f64,
    p_residual: f64,
}

fn cmd_family(a: &FamilyArgs, g: &GlobalOpts, cfg: &RootConfig) -> Result<String, CliError> {
    let fmt = format(g, true)?;
    check_range("r2-min", a.r2_min, a.r2_max, a.samples)?;
    if a.r2_min < 0.0 {
        return Err(usage("--r2-min must be non-negative"));
    }
    let rows = linspace(a.r2_min, a.r2_max, a.samples)
        .map(|r2| {
            let r3 = euler_family::eval_f_with(r2, cfg)?;
            Ok(FamilyRow {
                r2,
                r3,
                p_residual: euler_family::eval_p(r2, r3),
            })
        })
        .collect::<Result<Vec<_>, FamilyError>>()?;
    match fmt {
        Format::Csv => Ok(to_csv(
            &["r2", "r3", "p_residual"],
            rows.iter().map(|r| {
                vec![
                    Cell::Float(r.r2),
                    Cell::Float(r.r3),
                    Cell::Float(r.p_residual),
                ]
            }),
        )),
        Format::Json => Ok(to_json(&envelope("family", a, g, rows))?),
    }
}

#[derive(Serialize)]
struct EsResults {
    #[serde(flatten)]
    solution: EulerSolution,
    max_m3: f64,
}

fn solution(r2: f64, m3: f64) -> Result<EulerSolution, CliError> {
    finite("r2", r2)?;
    finite("m3", m3)?;
    if r2 < 0.0 {
        return Err(usage("--r2 must be non-negative"));
    }
    Ok(euler_family::build_solution(r2, m3)?)
}

fn cmd_es(a: &EsArgs, g: &GlobalOpts) -> Result<String, CliError> {
    format(g, false)?;
    let sol = solution(a.r2, a.m3)?;
    let results = EsResults {
        solution: sol,
        max_m3: sol.family().max_m3(),
    };
    Ok(to_json(
        &envelope("es", a, g, results).with_residuals(verify::check_es_equations(&sol)),
    )?)
}

fn cmd_lagrange(a: &LagrangeArgs, g: &GlobalOpts) -> Result<String, CliError> {
    format(g, false)?;
    let set = lagrange::lagrange_points(a.x)?;
    let report = lagrange::verify_lagrange(a.x)?;
    Ok(to_json(
        &envelope("lagrange", a, g, set).with_residuals(report),
    )?)
}

fn cmd_el(a: &EsArgs, g: &GlobalOpts, cfg: &RootConfig) -> Result<String, CliError> {
    format(g, false)?;
    let sol = solution(a.r2, a.m3)?;
    let set = el_points::find_el_points_with(&sol, cfg)?;
    let report = ResidualReport::new(
        set.points
            .iter()
            .map(|p| (format!("{:?}", p.klass), p.residual)),
    );
    Ok(to_json(&envelope("el", a, g, set).with_residuals(report))?)
}

fn cmd_curve(a: &CurveArgs, g: &GlobalOpts, cfg: &RootConfig) -> Result<String, CliError> {
    let fmt = format(g, true)?;
    finite("r2", a.r2)?;
    if !(a.step > 0.0) || !a.step.is_finite() {
        return Err(usage("--step must be positive"));
    }
    let samples = el_points::q3q4_locus_with(a.r2, a.step, cfg)?;
    match fmt {
        Format::Csv => Ok(to_csv(
            &["r4", "r5", "m3_common", "physical"],
            samples.iter().map(|s| {
                vec![
                    Cell::Float(s.r4),
                    Cell::Float(s.r5),
                    Cell::Float(s.m3),
                    Cell::Flag(s.physical),
                ]
            }),
        )),
        Format::Json => Ok(to_json(&envelope("curve", a, g, samples))?),
    }
}

#[derive(Serialize)]
struct ParamRow {
    w: f64,
    #[serde(rename = "G")]
    g: f64,
    r3: f64,
    p_residual: f64,
}

fn cmd_param(a: &ParamArgs, g: &GlobalOpts) -> Result<String, CliError> {
    let fmt = format(g, true)?;
    let ws: Vec<f64> = match a.w {
        Some(w) => vec![finite("w", w)?],
        None => {
            check_range("w-min", a.w_min, a.w_max, a.samples)?;
            linspace(a.w_min, a.w_max, a.samples).collect()
        }
    };
    if ws.iter().any(|w| *w < 0.0) {
        return Err(usage("w must be non-negative"));
    }
    let rows = ws
        .into_iter()
        .map(|w| {
            let gw = euler_family::parametrize_g(w)?;
            let r3 = gw + w + 1.0;
            Ok(ParamRow {
                w,
                g: gw,
                r3,
                p_residual: euler_family::eval_p(gw, r3),
            })
        })
        .collect::<Result<Vec<_>, FamilyError>>()?;
    match fmt {
        Format::Csv => Ok(to_csv(
            &["w", "G", "r3", "p_residual"],
            rows.iter().map(|r| {
                vec![
                    Cell::Float(r.w),
                    Cell::Float(r.g),
                    Cell::Float(r.r3),
                    Cell::Float(r.p_residual),
                ]
            }),
        )),
        Format::Json => Ok(to_json(&envelope("param", a, g, rows))?),
    }
}

#[derive(Serialize)]
struct IntegrationSummary {
    periods: u32,
    dt: f64,
    steps: usize,
    energy_drift: f64,
    momentum_drift: f64,
    step_too_large: bool,
    body_drift: Vec<verify::Drift>,
}

#[derive(Serialize)]
struct VerifyResults {
    solution: EulerSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    integration: Option<IntegrationSummary>,
}

fn read_solution(path: &PathBuf) -> Result<EulerSolution, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| usage(format!("cannot read stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?
    };
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let body = value.get("results").cloned().unwrap_or(value);
    serde_json::from_value(body)
        .map_err(|e| usage(format!("{}: not an Euler solution: {e}", path.display())))
}

fn cmd_verify(a: &VerifyArgs, g: &GlobalOpts) -> Result<String, CliError> {
    format(g, false)?;
    let sol = match (&a.from_json, a.r2, a.m3) {
        (Some(path), _, _) => read_solution(path)?,
        (None, Some(r2), Some(m3)) => solution(r2, m3)?,
        _ => return Err(usage("need --r2 and --m3, or --from-json")),
    };
    let probe = match (a.r4, a.r5) {
        (Some(x), Some(y)) => Some([finite("r4", x)?, finite("r5", y)?]),
        _ => None,
    };
    let mut report = match probe {
        Some([x, y]) => verify::accel_residual(&sol, x, y)?,
        None => verify::check_es_equations(&sol),
    };

    let mut integration = None;
    if a.integrate {
        if a.periods == 0 || a.dt_div == 0 {
            return Err(usage("--periods and --dt-div must be positive"));
        }
        let mut bodies = verify::solution_bodies(&sol);
        if let Some([x, y]) = probe {
            bodies.push(BodyState::co_rotating(
                crate::numerics::Point2::new(x, y),
                0.0,
            ));
        }
        let period = std::f64::consts::TAU;
        let dt = period / f64::from(a.dt_div);
        let run = verify::integrate_nbody(&bodies, period * f64::from(a.periods), dt)?;
        let drift = if probe.is_some() {
            *run.body_drift.last().expect("probe present")
        } else {
            run.drift
        };
        report = report.with_drift(drift);
        integration = Some(IntegrationSummary {
            periods: a.periods,
            dt,
            steps: run.times.len() - 1,
            energy_drift: run.energy_drift,
            momentum_drift: run.momentum_drift,
            step_too_large: run.step_too_large,
            body_drift: run.body_drift,
        });
    }
    let results = VerifyResults {
        solution: sol,
        probe,
        integration,
    };
    Ok(to_json(
        &envelope("verify", a, g, results).with_residuals(report),
    )?)
}
