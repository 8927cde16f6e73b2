//! `fourier-lcu` command-line tool.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for numerical failure.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fourier_lcu::extension::{
    alpha_of, eta_for_m, eta_star, l2_error, solve_least_squares, CoefficientSet, ExtensionError, ExtensionProblem,
};
use fourier_lcu::lcu::{
    assemble_block_encoding, build_decomposition, fd_coefficients, finite_difference_lcu, success_metrics,
    verify_encoding, LcuError,
};
use fourier_lcu::linalg::{spectral_norm, LinalgError};
use fourier_lcu::lindblad::{
    build_liouvillian, demo_system, propagator, run_demo, strategy_coefficients, DemoParams, LindbladError, Strategy,
};
use fourier_lcu::quadrature::set_order_override;
use fourier_lcu::records::{
    write_baseline_csv, write_demo_csv, write_pareto_csv, BaselineRow, CoefficientRecord, MatrixFile, RecordError,
};
use fourier_lcu::regularized::{
    geometric_schedule, lambda_path_limit, pareto_sweep, solve_regularized, RegularizedError, RegularizedProblem,
    LAMBDA_PATH_END,
};
use fourier_lcu::{CMatrix, CVector, C64};

const QUAD_ORDER_ENV: &str = "FOURIER_LCU_QUAD_ORDER";

/// Dense block encodings larger than this are checked through the LCU sum.
const DENSE_LIMIT: usize = 1024;

#[derive(Parser)]
#[command(name = "fourier-lcu", version, about = "Fourier-extension LCU coefficients, block encodings and demos")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute sine-series coefficients and write them as JSON.
    Coeffs(CoeffsArgs),
    /// Print the cost-optimal extension factor for m terms.
    EtaOpt {
        #[arg(long)]
        m: usize,
    },
    /// Sweep the regularisation path and write the error/alpha front as CSV.
    Pareto(ParetoArgs),
    /// Build and check the block encoding of an operator read from JSON.
    Verify(VerifyArgs),
    /// Run the driven-dephasing qubit comparison and write CSV.
    Demo(DemoArgs),
    /// Finite-difference LCU error against step size, as CSV.
    Baseline(BaselineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    LeastSquares,
    Regularized,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::LeastSquares => Strategy::LeastSquares,
            StrategyArg::Regularized => Strategy::Regularized,
        }
    }
}

#[derive(Args)]
struct CoeffsArgs {
    #[arg(long)]
    m: usize,
    /// Extension factor; defaults to the fitted value for m.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, value_enum, default_value = "least-squares")]
    strategy: StrategyArg,
    /// Solve at this lambda instead of following the path.
    #[arg(long, conflicts_with = "lambda_path")]
    lambda: Option<f64>,
    /// Take the small-lambda end of the warm-started path (the default for
    /// the regularized strategy).
    #[arg(long)]
    lambda_path: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParetoArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda_from: f64,
    #[arg(long, default_value_t = LAMBDA_PATH_END)]
    lambda_to: f64,
    #[arg(long, default_value_t = 40)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Matrix JSON: {"dim": d, "entries": [[re, im], ...]} in row-major order.
    #[arg(long)]
    operator: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value = "least-squares")]
    strategy: StrategyArg,
    /// Optional input state as JSON [[re, im], ...] for the success metrics.
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    /// Rabi frequency in Hz.
    #[arg(long, default_value_t = 1e5)]
    omega_hz: f64,
    /// Drive-axis angle in radians.
    #[arg(long, default_value_t = PI / 4.0, allow_hyphen_values = true)]
    phi: f64,
    /// Dephasing time in seconds.
    #[arg(long, default_value_t = 1.0)]
    t_phi: f64,
    #[arg(long, default_value_t = 500.0)]
    cycles: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    m_list: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "least-squares,regularized")]
    strategies: Vec<StrategyArg>,
    /// Also write the propagator as matrix JSON.
    #[arg(long)]
    propagator_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    /// Operator matrix JSON; a fixed 2x2 non-normal example by default.
    #[arg(long)]
    operator: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8")]
    orders: Vec<usize>,
    #[arg(long, default_value_t = 0.4)]
    tau_from: f64,
    #[arg(long, default_value_t = 0.025)]
    tau_to: f64,
    #[arg(long, default_value_t = 5)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(s) => write!(f, "invalid input: {s}"),
            CliError::Numerical(s) => write!(f, "numerical failure: {s}"),
        }
    }
}

impl From<ExtensionError> for CliError {
    fn from(e: ExtensionError) -> Self {
        match e {
            ExtensionError::InvalidProblem(_) | ExtensionError::NonpositiveScale(_) | ExtensionError::Quadrature(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<RegularizedError> for CliError {
    fn from(e: RegularizedError) -> Self {
        match e {
            RegularizedError::InvalidProblem(_) => CliError::Input(e.to_string()),
            RegularizedError::Extension(inner) => inner.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NoConvergence => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<LcuError> for CliError {
    fn from(e: LcuError) -> Self {
        match e {
            LcuError::Linalg(inner) => inner.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<LindbladError> for CliError {
    fn from(e: LindbladError) -> Self {
        match e {
            LindbladError::Linalg(inner) => inner.into(),
            LindbladError::Extension(inner) => inner.into(),
            LindbladError::Regularized(inner) => inner.into(),
            LindbladError::Lcu(inner) => inner.into(),
            LindbladError::DimensionMismatch { .. } | LindbladError::InvalidParams(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<RecordError> for CliError {
    fn from(e: RecordError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Write to `out`, or to standard output when no path is given.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| io_error(path, e)),
        None => io::stdout().write_all(bytes).map_err(|e| CliError::Input(e.to_string())),
    }
}

/// Summary lines go to stdout when the artifact is a file, else to stderr.
fn summary(out: Option<&Path>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn read_matrix(path: &Path) -> Result<CMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Ok(MatrixFile::from_json(&text)?.to_matrix()?)
}

fn read_state(path: &Path) -> Result<CVector, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let entries: Vec<[f64; 2]> =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(CVector::from_iterator(entries.len(), entries.iter().map(|[re, im]| C64::new(*re, *im))))
}

fn least_squares_strict(m: usize, eta: f64) -> Result<CoefficientSet, CliError> {
    match solve_least_squares(&ExtensionProblem::new(m, eta)?) {
        Ok(c) => Ok(c),
        Err(ExtensionError::IllConditioned { fallback, condition_estimate }) => {
            eprintln!(
                "normal equations broke down (condition estimate {condition_estimate:e}); QR fallback has epsilon {:e}",
                l2_error(&fallback)
            );
            Err(CliError::Numerical("least-squares Cholesky breakdown".into()))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_coeffs(args: &CoeffsArgs) -> Result<(), CliError> {
    let eta = args.eta.unwrap_or_else(|| eta_for_m(args.m));
    let set = match (args.strategy, args.lambda) {
        (StrategyArg::LeastSquares, None) if !args.lambda_path => least_squares_strict(args.m, eta)?,
        (StrategyArg::LeastSquares, _) => {
            return Err(CliError::Input("--lambda and --lambda-path need --strategy regularized".into()))
        }
        (StrategyArg::Regularized, Some(lambda)) => {
            solve_regularized(&RegularizedProblem::new(args.m, eta, lambda)?, None)?.coefficients
        }
        (StrategyArg::Regularized, None) => lambda_path_limit(args.m, eta)?.coefficients,
    };
    let epsilon = l2_error(&set);
    let alpha = alpha_of(&set, 1.0)?;
    let record = CoefficientRecord::new(&set, alpha, epsilon);
    emit(args.out.as_deref(), record.to_json()?.as_bytes())?;
    summary(args.out.as_deref(), &format!("epsilon={epsilon:e} alpha={alpha}"));
    Ok(())
}

fn cmd_eta_opt(m: usize) -> Result<(), CliError> {
    let fit = eta_for_m(m);
    match eta_star(m) {
        Ok(eta) => {
            println!("eta_star={eta} fit={fit}");
            Ok(())
        }
        Err(e @ ExtensionError::NoBracket { .. }) => {
            eprintln!("{e}; fitted value is {fit}");
            Err(CliError::Numerical(e.to_string()))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_pareto(args: &ParetoArgs) -> Result<(), CliError> {
    if args.points == 0 || !(args.lambda_from > 0.0) || !(args.lambda_to > 0.0) {
        return Err(CliError::Input("schedule needs positive lambdas and at least one point".into()));
    }
    if args.points > 1 && args.lambda_to >= args.lambda_from {
        return Err(CliError::Input("--lambda-to must be below --lambda-from".into()));
    }
    let eta = args.eta.unwrap_or_else(|| eta_for_m(args.m));
    let front = pareto_sweep(args.m, eta, &geometric_schedule(args.lambda_from, args.lambda_to, args.points))?;
    let mut buf = Vec::new();
    write_pareto_csv(&front, &mut buf)?;
    emit(args.out.as_deref(), &buf)?;
    let last = front.last().expect("nonempty schedule");
    let flag = if front.all_converged() { "" } else { " (some points hit the iteration cap)" };
    summary(
        args.out.as_deref(),
        &format!("alpha={} epsilon={:e} at lambda={:e}{flag}", last.alpha, last.epsilon, last.lambda),
    );
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    m: usize,
    strategy: Strategy,
    dim: usize,
    epsilon: f64,
    alpha: f64,
    ancilla_count: usize,
    /// Eigenvalue-wise bound on epsilon.
    transfer_bound: f64,
    /// `dense_block` when the full unitary was assembled, else `lcu_sum`.
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    success_probability: Option<f64>,
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let a = read_matrix(&args.operator)?;
    let strategy: Strategy = args.strategy.into();
    let coeffs = strategy_coefficients(strategy, args.m)?;
    let decomp = build_decomposition(&coeffs, &a)?;
    let dim = a.nrows();
    let (epsilon, method) = if (1usize << decomp.ancilla_count()) * dim <= DENSE_LIMIT {
        (verify_encoding(&assemble_block_encoding(&decomp)?, &a)?, "dense_block")
    } else {
        (spectral_norm(&(&a - fourier_lcu::lcu::apply_lcu_sum(&decomp)))?, "lcu_sum")
    };
    let (q, success_probability) = match &args.state {
        Some(path) => {
            let (q, p) = success_metrics(&decomp, &read_state(path)?)?;
            (Some(q), Some(p))
        }
        None => (None, None),
    };
    let report = VerifyReport {
        m: args.m,
        strategy,
        dim,
        epsilon,
        alpha: decomp.alpha,
        ancilla_count: decomp.ancilla_count(),
        transfer_bound: decomp.eigenvalue_transfer_bound(),
        method,
        q,
        success_probability,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Numerical(e.to_string()))? + "\n";
    emit(args.out.as_deref(), json.as_bytes())?;
    summary(args.out.as_deref(), &format!("epsilon={epsilon:e} alpha={}", decomp.alpha));
    Ok(())
}

fn cmd_demo(args: &DemoArgs) -> Result<(), CliError> {
    let params =
        DemoParams { rabi_frequency: args.omega_hz, phase: args.phi, dephasing_time: args.t_phi, cycles: args.cycles };
    params.validate()?;
    if let Some(path) = &args.propagator_out {
        let sys = demo_system(&params)?;
        let a = propagator(&build_liouvillian(&sys)?, sys.time)?;
        let file = MatrixFile { vectorization: Some("column".into()), ..MatrixFile::from_matrix(&a)? };
        fs::write(path, file.to_json()?).map_err(|e| io_error(path, e))?;
    }
    let mut reports = Vec::new();
    for &s in &args.strategies {
        for &m in &args.m_list {
            reports.push(run_demo(&params, s.into(), m)?);
        }
    }
    let mut buf = Vec::new();
    write_demo_csv(&reports, &mut buf)?;
    emit(args.out.as_deref(), &buf)?;
    if let Some(r) = reports.first() {
        summary(args.out.as_deref(), &format!("delta_u={:e} runs={}", r.unitarity_defect, reports.len()));
    }
    Ok(())
}

fn default_baseline_operator() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::new(0.3, 0.0), C64::new(0.2, -0.1), C64::new(0.0, 0.5), C64::new(-0.4, 0.0)])
}

fn cmd_baseline(args: &BaselineArgs) -> Result<(), CliError> {
    let a = match &args.operator {
        Some(path) => read_matrix(path)?,
        None => default_baseline_operator(),
    };
    if args.points == 0 || !(args.tau_from > 0.0) || !(args.tau_to > 0.0) {
        return Err(CliError::Input("tau range needs positive values and at least one point".into()));
    }
    for &p in &args.orders {
        fd_coefficients(p)?;
    }
    let taus = geometric_schedule(args.tau_from, args.tau_to, args.points);
    let mut rows = Vec::new();
    for &order in &args.orders {
        for &tau in &taus {
            let error = spectral_norm(&(finite_difference_lcu(&a, tau, order)? - &a))?;
            rows.push(BaselineRow { tau, order, error });
        }
    }
    let mut buf = Vec::new();
    write_baseline_csv(&rows, &mut buf)?;
    emit(args.out.as_deref(), &buf)?;
    Ok(())
}

fn quad_order_from_env() -> Result<(), CliError> {
    match std::env::var(QUAD_ORDER_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                set_order_override(Some(n));
                Ok(())
            }
            _ => Err(CliError::Input(format!("{QUAD_ORDER_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    quad_order_from_env()?;
    match &cli.command {
        Command::Coeffs(a) => cmd_coeffs(a),
        Command::EtaOpt { m } => cmd_eta_opt(*m),
        Command::Pareto(a) => cmd_pareto(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Demo(a) => cmd_demo(a),
        Command::Baseline(a) => cmd_baseline(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
