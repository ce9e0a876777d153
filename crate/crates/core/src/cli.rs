//! Command-line front end. The `lazyens` binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 success, 2 bad input, 3 solver did not converge,
//! 4 statistical check failed.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::die::{solve_beta, MeanConstraint, DEFAULT_MEAN_TOL};
use crate::error::Error;
use crate::hermitian::{validate_density, DensityMatrix, DENSITY_TOL};
use crate::io::{parse_matrix_json, write_state_dump, MatrixJson};
use crate::partition::{evaluate, EigenvalueVector};
use crate::sampler::{estimate_kl, sample_with, SampleOptions};
use crate::solver::{kl_from_uniform, solve_with, Solution, SolveOptions, DEFAULT_MAX_ITER, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_STATISTICAL: i32 = 4;

/// Batch counts below this get a low-power warning from `verify`.
pub const MIN_VERIFY_COUNT: usize = 1000;
/// `verify` passes when every entrywise |z| is at most this.
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Debug, Parser)]
#[command(name = "lazyens", version, about = "Maximum-entropy ensembles of pure states")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the ensemble parameter B for a density matrix.
    Solve(SolveArgs),
    /// Maximum-entropy distribution over die faces with a given mean.
    Die(DieArgs),
    /// Solve, then draw states from the ensemble.
    Sample(SampleArgs),
    /// Solve, sample, and compare the empirical average with the input.
    Verify(VerifyArgs),
    /// Partition function, average and Hessian for given eigenvalues of B.
    Zfun(ZfunArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Density matrix in the matrix JSON format.
    #[arg(long)]
    pub rho: PathBuf,
    /// Convergence threshold on the dual gradient.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DieArgs {
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "1,2,3,4,5,6"
    )]
    pub values: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long, default_value_t = DEFAULT_MEAN_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the drawn states as a CSV dump.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ZfunArgs {
    /// Eigenvalues of B, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub b: Vec<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
pub struct BoundsJson {
    pub y_min: f64,
    pub y_max: f64,
    pub lambda_min: f64,
    pub sign_ok: bool,
    pub spread_ok: bool,
}

#[derive(Debug, Serialize)]
pub struct SolveJson {
    pub n: usize,
    #[serde(rename = "B")]
    pub b: MatrixJson,
    #[serde(rename = "absorbedB")]
    pub absorbed_b: MatrixJson,
    #[serde(rename = "logZ")]
    pub log_z: f64,
    pub kl: Option<f64>,
    pub bounds_check: BoundsJson,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub dual_objective: f64,
    pub converged: bool,
}

#[derive(Debug, Serialize)]
pub struct DieJson {
    pub values: Vec<f64>,
    pub mean: f64,
    pub beta: f64,
    pub probs: Vec<f64>,
    pub entropy: f64,
}

#[derive(Debug, Serialize)]
pub struct ZfunJson {
    pub b: Vec<f64>,
    #[serde(rename = "logZ")]
    pub log_z: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct ZEntryJson {
    pub row: usize,
    pub col: usize,
    pub part: &'static str,
    pub z: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyJson {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub accept_rate: f64,
    pub max_abs_z: f64,
    pub z_scores: Vec<ZEntryJson>,
    pub kl: f64,
    pub kl_estimate: f64,
    pub kl_std_error: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct SampleJson {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub accept_rate: f64,
    pub empirical_mean: MatrixJson,
}

/// Parses `args` (including the program name) and runs the command, writing
/// reports to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    execute(&config.command, out, err)
}

pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match command {
        Command::Solve(a) => cmd_solve(a, out, err),
        Command::Die(a) => cmd_die(a, out),
        Command::Sample(a) => cmd_sample(a, out),
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Zfun(a) => cmd_zfun(a, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } | Error::EighNoConvergence { .. } => EXIT_CONVERGENCE,
        _ => EXIT_INPUT,
    }
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

type CliResult = std::result::Result<i32, CliError>;

fn read_rho(path: &Path) -> std::result::Result<DensityMatrix, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    let m = parse_matrix_json(&text)?;
    Ok(validate_density(m, DENSITY_TOL)?)
}

fn solve_rho(rho: &DensityMatrix, tol: f64, max_iter: usize) -> std::result::Result<Solution, Error> {
    solve_with(
        rho,
        &SolveOptions {
            tol,
            max_iter,
            initial: None,
        },
    )
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn solve_json(sol: &Solution, rho: &DensityMatrix) -> SolveJson {
    let ens = &sol.ensemble;
    let bounds = sol.report.bounds;
    SolveJson {
        n: ens.dim(),
        b: MatrixJson::from_hermitian(ens.parameter()),
        absorbed_b: MatrixJson::from_hermitian(ens.absorbed()),
        log_z: ens.log_z(),
        kl: kl_from_uniform(ens, rho).ok().map(|k| k.kl),
        bounds_check: BoundsJson {
            y_min: bounds.y_min,
            y_max: bounds.y_max,
            lambda_min: bounds.lambda_min,
            sign_ok: bounds.sign_ok,
            spread_ok: bounds.spread_ok,
        },
        iterations: sol.report.iterations,
        gradient_norm: sol.report.gradient_norm,
        dual_objective: sol.report.dual_objective,
        converged: sol.report.converged,
    }
}

fn matrix_table(m: &MatrixJson) -> String {
    let mut s = String::new();
    for i in 0..m.n {
        let cells: Vec<String> = (0..m.n)
            .map(|j| format!("{:>16.12} {:+.12}i", m.re[i][j], m.im[i][j]))
            .collect();
        let _ = writeln!(s, "  {}", cells.join("  "));
    }
    s
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let rho = read_rho(&args.rho)?;
    let (solution, code, failure) = match solve_rho(&rho, args.tol, args.max_iter) {
        Ok(sol) => (sol, EXIT_OK, None),
        Err(Error::NoConvergence {
            partial,
            iterations,
            gradient_norm,
        }) => (
            *partial,
            EXIT_CONVERGENCE,
            Some(format!(
                "did not converge after {iterations} iterations (gradient norm {gradient_norm:e})"
            )),
        ),
        Err(e) => return Err(e.into()),
    };
    let report = solve_json(&solution, &rho);
    let json = to_json(&report);
    if let Some(path) = &args.out {
        fs::write(path, format!("{json}\n"))?;
    }
    if args.json {
        writeln!(out, "{json}")?;
    } else {
        writeln!(out, "n            {}", report.n)?;
        writeln!(out, "iterations   {}", report.iterations)?;
        writeln!(out, "converged    {}", report.converged)?;
        writeln!(out, "grad norm    {:.6e}", report.gradient_norm)?;
        writeln!(out, "logZ         {:.12}", report.log_z)?;
        match report.kl {
            Some(kl) => writeln!(out, "kl           {kl:.12}")?,
            None => writeln!(out, "kl           n/a")?,
        }
        writeln!(
            out,
            "bounds       y_min {:.12} y_max {:.12} spread<=2/lambda_min {}",
            report.bounds_check.y_min, report.bounds_check.y_max, report.bounds_check.spread_ok
        )?;
        writeln!(out, "B")?;
        write!(out, "{}", matrix_table(&report.b))?;
        writeln!(out, "absorbedB")?;
        write!(out, "{}", matrix_table(&report.absorbed_b))?;
    }
    if let Some(msg) = failure {
        writeln!(err, "error: {msg}")?;
    }
    Ok(code)
}

fn cmd_die(args: &DieArgs, out: &mut dyn Write) -> CliResult {
    let constraint = MeanConstraint::new(args.mean, &args.values)?;
    let die = solve_beta(&args.values, constraint, args.tol)?;
    let report = DieJson {
        values: die.values.clone(),
        mean: die.mean(),
        beta: die.beta,
        probs: die.probs.clone(),
        entropy: die.entropy(),
    };
    if args.json {
        writeln!(out, "{}", to_json(&report))?;
    } else {
        writeln!(out, "beta     {:.12}", report.beta)?;
        writeln!(out, "mean     {:.12}", report.mean)?;
        writeln!(out, "entropy  {:.12}", report.entropy)?;
        writeln!(out, "value            probability")?;
        for (a, p) in report.values.iter().zip(&report.probs) {
            writeln!(out, "{a:<16} {p:.12}")?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_zfun(args: &ZfunArgs, out: &mut dyn Write) -> CliResult {
    let b = EigenvalueVector::new(args.b.clone())?;
    let value = evaluate(&b, true);
    let h = value.hessian.expect("requested");
    let report = ZfunJson {
        b: args.b.clone(),
        log_z: value.log_z,
        gradient: value.average.clone(),
        hessian: h.row_iter().map(|r| r.iter().copied().collect()).collect(),
    };
    if args.json {
        writeln!(out, "{}", to_json(&report))?;
    } else {
        writeln!(out, "logZ      {:.15e}", report.log_z)?;
        let g: Vec<String> = report.gradient.iter().map(|v| format!("{v:.15e}")).collect();
        writeln!(out, "gradient  {}", g.join(" "))?;
        writeln!(out, "hessian")?;
        for row in &report.hessian {
            let r: Vec<String> = row.iter().map(|v| format!("{v:>22.15e}")).collect();
            writeln!(out, "  {}", r.join(" "))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_sample(args: &SampleArgs, out: &mut dyn Write) -> CliResult {
    let rho = read_rho(&args.rho)?;
    let sol = solve_rho(&rho, args.tol, DEFAULT_MAX_ITER)?;
    let opts = SampleOptions {
        keep_states: args.out.is_some(),
    };
    let batch = sample_with(&sol.ensemble, args.count, args.seed, opts)?;
    if let (Some(path), Some(states)) = (&args.out, &batch.states) {
        let file = fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        write_state_dump(&mut w, args.seed, states)?;
        w.flush()?;
    }
    let report = SampleJson {
        n: batch.dim(),
        count: batch.count,
        seed: batch.seed,
        accept_rate: batch.accept_rate,
        empirical_mean: MatrixJson::from_hermitian(&batch.empirical_mean),
    };
    if args.json {
        writeln!(out, "{}", to_json(&report))?;
    } else {
        writeln!(out, "count        {}", report.count)?;
        writeln!(out, "seed         {}", report.seed)?;
        writeln!(out, "accept rate  {:.12}", report.accept_rate)?;
        writeln!(out, "empirical mean")?;
        write!(out, "{}", matrix_table(&report.empirical_mean))?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let rho = read_rho(&args.rho)?;
    let sol = solve_rho(&rho, args.tol, DEFAULT_MAX_ITER)?;
    if args.count < MIN_VERIFY_COUNT {
        writeln!(
            err,
            "warning: count {} is below {MIN_VERIFY_COUNT}; the test has little power",
            args.count
        )?;
    }
    let batch = sample_with(&sol.ensemble, args.count, args.seed, SampleOptions::default())?;
    let z = batch.z_scores(rho.matrix())?;
    let kl = kl_from_uniform(&sol.ensemble, &rho)?;
    let kl_est = estimate_kl(&sol.ensemble, &batch)?;
    let passed = z.max_abs <= Z_THRESHOLD;
    let report = VerifyJson {
        n: rho.dim(),
        count: args.count,
        seed: args.seed,
        accept_rate: batch.accept_rate,
        max_abs_z: z.max_abs,
        z_scores: z
            .entries
            .iter()
            .map(|e| ZEntryJson {
                row: e.row,
                col: e.col,
                part: match e.part {
                    crate::sampler::Part::Re => "re",
                    crate::sampler::Part::Im => "im",
                },
                z: e.z,
            })
            .collect(),
        kl: kl.kl,
        kl_estimate: kl_est.estimate,
        kl_std_error: kl_est.std_error,
        passed,
    };
    if args.json {
        writeln!(out, "{}", to_json(&report))?;
    } else {
        writeln!(out, "count        {}", report.count)?;
        writeln!(out, "seed         {}", report.seed)?;
        writeln!(out, "accept rate  {:.12}", report.accept_rate)?;
        writeln!(out, "kl           {:.12}", report.kl)?;
        writeln!(
            out,
            "kl estimate  {:.12} +- {:.12}",
            report.kl_estimate, report.kl_std_error
        )?;
        writeln!(out, "entry   part  z")?;
        for e in &report.z_scores {
            writeln!(out, "({},{})   {:<4}  {:+.6}", e.row, e.col, e.part, e.z)?;
        }
        writeln!(out, "max |z|      {:.6}", report.max_abs_z)?;
        writeln!(out, "result       {}", if passed { "pass" } else { "FAIL" })?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_STATISTICAL })
}
