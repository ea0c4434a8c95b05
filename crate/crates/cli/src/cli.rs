//! Command line entry point.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qloan::designer::{DesignConfig, Objective, RegionParams};
use qloan::format::{fmt_rounded, schedule_csv, table_csv};
use qloan::indexed::{fit_index, read_observations, IndexModel};
use qloan::loan::{AmortizationSystem, LoanSpec, RateModel};
use qloan::rotation::rotation_from_angles;
use qloan::LoanError;

use crate::api::{self, ApiError, ErrorEnvelope};
use crate::figures;

#[derive(Debug, Parser)]
#[command(name = "qloan", version, about = "Loan schedules, SO(M) schedule rotations and angle design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amortization schedule as CSV (or JSON)
    Schedule(ScheduleArgs),
    /// Rotate a schedule by the given angles
    Rotate(RotateArgs),
    /// Search rotation angles for a target schedule
    Design(DesignArgs),
    /// Sign-pattern feasibility grid for M = 3
    Region(RegionArgs),
    /// Check the operator algebra of a schedule
    VerifyAlgebra(VerifyArgs),
    /// Fit power-law and linear index models to `n,u` observations
    FitIndex(FitArgs),
    /// Run the HTTP/JSON service
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum System {
    French,
    German,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct LoanArgs {
    /// Loan specification as a JSON file; overrides the flags below
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 100.0, allow_hyphen_values = true)]
    pub d0: f64,
    #[arg(long = "M", default_value_t = 10)]
    pub periods: usize,
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, value_enum, default_value = "french")]
    pub system: System,
    /// Index model as JSON, e.g. '{"geometric":{"a":1.1,"u1":1.1}}'
    #[arg(long)]
    pub index: Option<String>,
    /// Constant inflation factor: shorthand for u_n = a^n
    #[arg(long, conflicts_with = "index")]
    pub inflation: Option<f64>,
}

impl LoanArgs {
    fn loan(&self) -> Result<LoanSpec, CliError> {
        match &self.spec {
            Some(path) => read_json(path),
            None => {
                let system = match self.system {
                    System::French => AmortizationSystem::French,
                    System::German => AmortizationSystem::German,
                };
                Ok(LoanSpec::new(self.d0, self.periods, RateModel::Constant(self.t), system))
            }
        }
    }

    fn index(&self) -> Result<Option<IndexModel>, CliError> {
        if let Some(a) = self.inflation {
            return Ok(Some(IndexModel::Geometric { a, u1: a }));
        }
        self.index
            .as_deref()
            .map(|s| serde_json::from_str(s).map_err(|e| LoanError::Parse(format!("--index: {e}")).into()))
            .transpose()
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Round CSV values to this many decimals (display only)
    #[arg(long)]
    pub round: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScheduleFigure {
    Nicl,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub loan: LoanArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Emit a figure data set instead
    #[arg(long, value_enum)]
    pub figure: Option<ScheduleFigure>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RotateFigure {
    A1,
}

#[derive(Debug, Args)]
pub struct RotateArgs {
    #[command(flatten)]
    pub loan: LoanArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Angles in plane order (1,2), (1,3), ..., (M-1,M)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub angles: Vec<f64>,
    #[arg(long, value_enum)]
    pub figure: Option<RotateFigure>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub loan: LoanArgs,
    /// Full design request as JSON; overrides the loan and objective flags
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Make every installment equal
    #[arg(long, conflicts_with_all = ["target", "cap"])]
    pub equalize: bool,
    /// Target installments, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Vec<f64>,
    /// Cap one installment: PERIOD:CAP
    #[arg(long)]
    pub cap: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
    pub z: f64,
    /// Inflation factor a between periods
    #[arg(long = "a", default_value_t = 1.05)]
    pub inflation: f64,
    /// Signs of qbar_n - q_n, e.g. --+
    #[arg(long, default_value = "--+", allow_hyphen_values = true)]
    pub pattern: String,
    #[arg(long, default_value_t = 200)]
    pub grid_n: usize,
    /// Base loan as a JSON file (M = 3); German d0=100, t=0.2 by default
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Emit both figure slices z = 0.6 and z = 0.7
    #[arg(long)]
    pub figure: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub loan: LoanArgs,
    /// Absolute residual bound; 1e-10 max(d0, 1) by default
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with header n,u
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "QLOAN_BIND", default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Allow cross-origin requests from any origin
    #[arg(long)]
    pub cors: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Api(#[from] ApiError),
    #[error("{0}")]
    Io(String),
    /// Computation finished but a check it reports on failed.
    #[error("{0}")]
    CheckFailed(String),
}

impl From<LoanError> for CliError {
    fn from(e: LoanError) -> Self {
        CliError::Api(ApiError::Domain(e))
    }
}

impl CliError {
    fn envelope(&self) -> ErrorEnvelope {
        match self {
            CliError::Api(e) => e.into(),
            CliError::Io(m) => ErrorEnvelope::new("io_error", m.clone()),
            CliError::CheckFailed(m) => ErrorEnvelope::new("check_failed", m.clone()),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| LoanError::Parse(format!("{}: {e}", path.display())).into())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable response");
    s.push('\n');
    s
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn schedule(args: &ScheduleArgs) -> Result<(), CliError> {
    if let Some(ScheduleFigure::Nicl) = args.figure {
        return emit(&args.output.out, &figures::nicl(args.output.round)?);
    }
    let req = api::ScheduleRequest {
        loan: args.loan.loan()?,
        index: args.loan.index()?,
    };
    let res = api::schedule(&req)?;
    let text = match (args.output.format, &res.currency) {
        (Format::Json, _) => to_json(&res),
        (Format::Csv, None) => schedule_csv(&res.schedule, args.output.round),
        (Format::Csv, Some(c)) => {
            let f = |v| fmt_rounded(v, args.output.round);
            let mut out = String::from("n,u,d,a,y,q\n");
            out.push_str(&format!("0,{},{},,,\n", f(c.u[0]), f(c.d[0])));
            for n in 1..=c.periods() {
                out.push_str(&format!(
                    "{n},{},{},{},{},{}\n",
                    f(c.u[n]),
                    f(c.d[n]),
                    f(c.a[n - 1]),
                    f(c.y[n - 1]),
                    f(c.q[n - 1])
                ));
            }
            out
        }
    };
    emit(&args.output.out, &text)
}

fn rotate(args: &RotateArgs) -> Result<(), CliError> {
    if let Some(RotateFigure::A1) = args.figure {
        return emit(&args.output.out, &figures::a1(args.output.round)?);
    }
    let loan = args.loan.loan()?;
    let rotation = rotation_from_angles(loan.periods, &args.angles)?;
    let res = api::rotate(&api::RotateRequest {
        loan,
        rotation,
        index: args.loan.index()?,
    })?;
    let text = match args.output.format {
        Format::Json => to_json(&res),
        Format::Csv => {
            let r = &res.rotated;
            let rows = (0..res.q.len()).map(|n| {
                vec![(n + 1) as f64, res.q[n], r.q_bar[n], r.a_bar[n], r.y_bar[n], r.d_bar[n], r.risk[n]]
            });
            table_csv(&["n", "q", "q_bar", "a_bar", "y_bar", "d_bar", "risk"], rows, args.output.round)
        }
    };
    emit(&args.output.out, &text)
}

fn parse_cap(cap: &str) -> Result<Objective, CliError> {
    let parsed = cap
        .split_once(':')
        .and_then(|(p, c)| Some((p.trim().parse().ok()?, c.trim().parse().ok()?)));
    match parsed {
        Some((period, cap)) => Ok(Objective::CapPayment { period, cap }),
        None => Err(LoanError::Parse(format!("--cap expects PERIOD:CAP, got {cap:?}")).into()),
    }
}

fn design(args: &DesignArgs) -> Result<(), CliError> {
    let mut req: api::DesignRequest = match &args.problem {
        Some(path) => read_json(path)?,
        None => {
            let objective = if let Some(cap) = &args.cap {
                parse_cap(cap)?
            } else if !args.target.is_empty() {
                Objective::TargetSchedule(args.target.clone())
            } else {
                Objective::Equalize
            };
            api::DesignRequest {
                loan: args.loan.loan()?,
                index: args.loan.index()?,
                objective,
                constraints: Vec::new(),
                planes: None,
                config: DesignConfig::default(),
            }
        }
    };
    if let Some(seed) = args.seed {
        req.config.seed = seed;
    }
    emit(&args.out, &to_json(&api::design(&req)?))
}

fn region(args: &RegionArgs) -> Result<(), CliError> {
    if args.figure {
        if args.grid_n > api::MAX_GRID {
            return Err(LoanError::InvalidSpec(format!("grid_n exceeds {}", api::MAX_GRID)).into());
        }
        return emit(&args.out, &figures::region(args.grid_n)?);
    }
    let mut params = RegionParams {
        z: args.z,
        inflation: args.inflation,
        pattern: args.pattern.clone(),
        grid_n: args.grid_n,
        ..Default::default()
    };
    if let Some(path) = &args.spec {
        params.loan = read_json(path)?;
    }
    let grid = api::region_grid(&params)?;
    let text = match args.format {
        Format::Json => to_json(&api::RegionResponse::from(grid)),
        Format::Csv => format!("x,y,feasible\n{}", figures::region_rows(&grid, None)),
    };
    emit(&args.out, &text)
}

fn verify_algebra(args: &VerifyArgs) -> Result<(), CliError> {
    let res = api::verify_algebra(&api::VerifyAlgebraRequest {
        loan: args.loan.loan()?,
        tolerance: args.tol,
    })?;
    emit(&args.out, &to_json(&res))?;
    if res.all_pass {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "algebra check failed: max residual {} above {}",
            res.max_residual, res.tolerance
        )))
    }
}

fn fit(args: &FitArgs) -> Result<(), CliError> {
    let file = std::fs::File::open(&args.input).map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let fit = fit_index(&read_observations(file)?)?;
    #[derive(Serialize)]
    struct FitOutput<'a> {
        power_law: &'a qloan::indexed::FittedModel,
        linear: &'a qloan::indexed::FittedModel,
        best: &'a IndexModel,
    }
    let output = FitOutput {
        power_law: &fit.power_law,
        linear: &fit.linear,
        best: &fit.best().model,
    };
    emit(&args.out, &to_json(&output))
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    runtime
        .block_on(crate::service::serve(&args.bind, args.cors))
        .map_err(|e| CliError::Io(format!("{}: {e}", args.bind)))
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Schedule(a) => schedule(a),
        Command::Rotate(a) => rotate(a),
        Command::Design(a) => design(a),
        Command::Region(a) => region(a),
        Command::VerifyAlgebra(a) => verify_algebra(a),
        Command::FitIndex(a) => fit(a),
        Command::Serve(a) => serve(a),
    }
}

/// Exit codes: 0 success, 1 domain or I/O error, 2 usage error.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.envelope()).expect("serializable envelope"));
            ExitCode::from(1)
        }
    }
}
