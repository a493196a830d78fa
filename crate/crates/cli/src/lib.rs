//! Command-line front end for robust decentralized H2 synthesis.
//!
//! Three subcommands cover the workflow:
//!
//! * `rdh2 solve problem.json` — synthesize a gain, writing `result.json`
//!   and `convergence.csv`.
//! * `rdh2 verify problem.json --result result.json` — independently audit
//!   a gain against every vertex of the uncertainty polytope, writing
//!   `verify_report.json`.
//! * `rdh2 simulate problem.json --result result.json --vertex lower` —
//!   integrate the closed-loop impulse response, writing `trajectory.csv`
//!   and `trajectory.svg`.
//!
//! Exit codes: 0 success (solve: converged; verify: all checks hold),
//! 1 input error, 2 iteration cap reached, 3 divergence, 4 verification
//! failure.

pub mod plot;
pub mod problem;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use rdh2_core::control::{simulate_impulse, verify, GainMatrix, VerificationReport};
use rdh2_core::model::{enumerate_vertices, vertex_plant, PlantModel, UncertaintyPolytope};
use rdh2_core::solver::{solve, SolverStatus};
use rdh2_core::Problem;

use problem::{parse_problem, CliError, ParsedProblem, SolverOverrides};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_MAX_ITERATIONS: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_UNVERIFIED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "rdh2",
    version,
    about = "Robust decentralized H2 state-feedback synthesis",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a decentralized gain for a problem file.
    Solve(SolveArgs),
    /// Audit a gain against every vertex of the uncertainty polytope.
    Verify(VerifyArgs),
    /// Integrate the closed-loop impulse response at one vertex.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem description (JSON).
    pub problem: PathBuf,
    /// Penalty parameter; overrides the problem file.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Multiplier step-length factor; overrides the problem file.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Stopping tolerance on the residual; overrides the problem file.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Iteration cap; overrides the problem file.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Convergence-log sampling stride; overrides the problem file.
    #[arg(long = "log-every")]
    pub log_every: Option<usize>,
    /// Directory for result.json and convergence.csv.
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Problem description (JSON).
    pub problem: PathBuf,
    /// Take the gain and bound from a solve result.
    #[arg(long, conflicts_with_all = ["gain"])]
    pub result: Option<PathBuf>,
    /// Take the gain from a bare matrix file ({"rows", "cols", "data"}).
    #[arg(long, requires = "bound")]
    pub gain: Option<PathBuf>,
    /// Guaranteed-cost bound to audit against; required with --gain,
    /// overrides the stored bound with --result.
    #[arg(long)]
    pub bound: Option<f64>,
    /// Directory for verify_report.json.
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Problem description (JSON).
    pub problem: PathBuf,
    /// Take the gain from a solve result.
    #[arg(long, conflicts_with_all = ["gain"])]
    pub result: Option<PathBuf>,
    /// Take the gain from a bare matrix file ({"rows", "cols", "data"}).
    #[arg(long)]
    pub gain: Option<PathBuf>,
    /// Which plant to simulate: "nominal", "lower", "upper", or a vertex
    /// index.
    #[arg(long, default_value = "nominal")]
    pub vertex: String,
    /// Simulation horizon in seconds.
    #[arg(long, default_value_t = 20.0)]
    pub horizon: f64,
    /// Integration step in seconds.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Directory for trajectory.csv and trajectory.svg.
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
}

/// Dispatch a parsed command line, mapping every error to exit code 1.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Verify(args) => run_verify(&args),
        Command::Simulate(args) => run_simulate(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_INPUT_ERROR
        }
    }
}

fn load(path: &Path) -> Result<(ParsedProblem, UncertaintyPolytope<f64>), CliError> {
    let parsed = parse_problem(path)?;
    let polytope =
        enumerate_vertices(&parsed.plant, &parsed.uncertainty).map_err(CliError::validation)?;
    Ok((parsed, polytope))
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn describe(parsed: &ParsedProblem, polytope: &UncertaintyPolytope<f64>) -> String {
    format!(
        "problem: {} ({} vertices, {} states, {} inputs, blocks {:?})",
        parsed.name.as_deref().unwrap_or("unnamed"),
        polytope.count(),
        parsed.plant.n(),
        parsed.plant.m(),
        parsed.structure.block_sizes(),
    )
}

fn print_matrix(label: &str, matrix: &DMatrix<f64>) {
    println!("{label}:");
    for r in 0..matrix.nrows() {
        let row: Vec<String> = (0..matrix.ncols()).map(|c| format!("{:10.4}", matrix[(r, c)])).collect();
        println!("  [{} ]", row.join(" "));
    }
}

pub fn run_solve(args: &SolveArgs) -> Result<i32, CliError> {
    let (parsed, polytope) = load(&args.problem)?;
    let flags = SolverOverrides {
        sigma: args.sigma,
        tau: args.tau,
        epsilon: args.eps,
        max_iterations: args.max_iter,
        log_every: args.log_every,
    };
    let config = flags.over(parsed.solver).resolve()?;

    let problem = Problem::new(&parsed.plant, &polytope, parsed.structure.clone())
        .map_err(CliError::validation)?;
    println!("{}", describe(&parsed, &polytope));
    println!(
        "solving with sigma {}, tau {}, eps {:e}, max {} iterations",
        config.sigma(),
        config.tau(),
        config.epsilon(),
        config.max_iterations()
    );

    let result = solve(&problem, &config)
        .map_err(|e| CliError::Validation { message: format!("solver failed: {e}") })?;

    ensure_out_dir(&args.out_dir)?;
    let result_path = args.out_dir.join("result.json");
    let csv_path = args.out_dir.join("convergence.csv");
    report::write_file(&result_path, &report::render_result(&result))?;
    report::write_file(&csv_path, &report::render_convergence_csv(&result.history))?;

    println!(
        "status: {} after {} iterations ({:.2} s)",
        result.status,
        result.iterations,
        result.wall_time.as_secs_f64()
    );
    println!("bound: {:.6}", result.bound);
    match &result.gain {
        Some(gain) => print_matrix("gain", gain.matrix()),
        None => println!("gain: not recoverable from the certificate"),
    }
    println!("wrote {} and {}", result_path.display(), csv_path.display());

    Ok(match result.status {
        SolverStatus::Converged => EXIT_OK,
        SolverStatus::MaxIterations => EXIT_MAX_ITERATIONS,
        SolverStatus::Diverged => EXIT_DIVERGED,
    })
}

/// Resolve the gain matrix (and, if present, a stored bound) named by
/// `--result`/`--gain` flags shared by verify and simulate.
fn gain_source(
    result: &Option<PathBuf>,
    gain: &Option<PathBuf>,
) -> Result<(DMatrix<f64>, Option<f64>), CliError> {
    match (result, gain) {
        (Some(result_path), None) => {
            let file = report::read_result(result_path)?;
            let k = file.k.ok_or_else(|| {
                CliError::usage(format!(
                    "{} carries no recovered gain",
                    result_path.display()
                ))
            })?;
            Ok((k.to_matrix("k")?, file.bound))
        }
        (None, Some(gain_path)) => Ok((report::read_gain_matrix(gain_path)?, None)),
        _ => Err(CliError::usage("pass exactly one of --result or --gain")),
    }
}

pub fn run_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let (parsed, polytope) = load(&args.problem)?;
    let (matrix, stored_bound) = gain_source(&args.result, &args.gain)?;
    let bound = args
        .bound
        .or(stored_bound)
        .ok_or_else(|| CliError::usage("no bound available: pass --bound"))?;
    if !bound.is_finite() {
        return Err(CliError::usage(format!("bound must be finite, got {bound}")));
    }

    let gain =
        GainMatrix::from_dense(&parsed.structure, matrix).map_err(CliError::validation)?;
    let report_data: VerificationReport<f64> =
        verify(&parsed.plant, &polytope, &gain, bound).map_err(CliError::validation)?;

    ensure_out_dir(&args.out_dir)?;
    let report_path = args.out_dir.join("verify_report.json");
    report::write_file(&report_path, &report::render_report(&report_data))?;

    println!("{}", describe(&parsed, &polytope));
    let flag = |ok: bool| if ok { "ok" } else { "FAILED" };
    println!(
        "structure: {}  stability: {}  bound: {}",
        flag(report_data.structure_ok),
        flag(report_data.all_stable),
        flag(report_data.bound_ok)
    );
    match report_data.worst_h2_squared {
        Some(worst) => println!("worst squared H2 cost: {:.6} (bound {:.6})", worst, bound),
        None => println!("worst squared H2 cost: undefined (unstable vertex)"),
    }
    println!("worst spectral abscissa: {:.6}", report_data.worst_abscissa);
    println!("wrote {}", report_path.display());

    let ok = report_data.structure_ok && report_data.all_stable && report_data.bound_ok;
    Ok(if ok { EXIT_OK } else { EXIT_UNVERIFIED })
}

pub fn run_simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let (parsed, polytope) = load(&args.problem)?;
    let (matrix, _) = gain_source(&args.result, &args.gain)?;
    let gain =
        GainMatrix::from_dense(&parsed.structure, matrix).map_err(CliError::validation)?;

    let (label, sim_plant): (String, PlantModel<f64>) = match args.vertex.as_str() {
        "nominal" => ("nominal".to_string(), parsed.plant.clone()),
        "lower" => (
            format!("lower (index 0 of {})", polytope.count()),
            vertex_plant(&parsed.plant, &polytope, 0).map_err(CliError::validation)?,
        ),
        "upper" => (
            format!("upper (index {} of {})", polytope.count() - 1, polytope.count()),
            vertex_plant(&parsed.plant, &polytope, polytope.count() - 1)
                .map_err(CliError::validation)?,
        ),
        other => {
            let index: usize = other.parse().map_err(|_| {
                CliError::usage(format!(
                    "--vertex takes nominal, lower, upper, or an index; got `{other}`"
                ))
            })?;
            (
                format!("index {index} of {}", polytope.count()),
                vertex_plant(&parsed.plant, &polytope, index).map_err(CliError::validation)?,
            )
        }
    };

    let response = simulate_impulse(&sim_plant, &gain, args.horizon, args.dt)
        .map_err(CliError::validation)?;

    ensure_out_dir(&args.out_dir)?;
    let csv_path = args.out_dir.join("trajectory.csv");
    let svg_path = args.out_dir.join("trajectory.svg");
    report::write_file(&csv_path, &report::render_trajectory_csv(&response))?;

    let states = parsed.plant.n();
    let mut series = Vec::with_capacity(response.channels() * states);
    for (c, traj) in response.states.iter().enumerate() {
        for j in 0..states {
            let values: Vec<f64> = (0..traj.nrows()).map(|s| traj[(s, j)]).collect();
            series.push((format!("w{c}_x{j}"), values));
        }
    }
    let title = format!(
        "impulse response, {} plant",
        parsed.name.as_deref().unwrap_or("unnamed")
    );
    report::write_file(&svg_path, &plot::line_chart(&title, &response.times, &series))?;

    println!("{}", describe(&parsed, &polytope));
    println!(
        "vertex: {label}; horizon {} s, step {} s, {} samples",
        args.horizon,
        args.dt,
        response.times.len()
    );
    let decay: Vec<String> = response
        .states
        .iter()
        .map(|traj| {
            let first = traj.row(0).norm();
            let last = traj.row(traj.nrows() - 1).norm();
            if first > 0.0 {
                format!("{:.2e}", last / first)
            } else {
                "n/a".to_string()
            }
        })
        .collect();
    println!("channel decay |x(T)|/|x(0)|: {}", decay.join(", "));
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    Ok(EXIT_OK)
}
