//! `mpdec`: run benchmark integrations and convergence studies.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mpdec_core::baselines::Scheme;
use mpdec_core::harness::{convergence_study, halving_sequence, write_error_report_csv, write_trajectory_csv};
use mpdec_core::mpdec::{integrate, MPDeCConfig, StepSchedule};
use mpdec_core::problems::{self, BenchmarkProblem, ScheduleKind, PROBLEM_NAMES};
use mpdec_core::Error;

#[derive(Parser, Debug)]
#[command(name = "mpdec", version, about = "Modified Patankar deferred correction integrators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a benchmark problem and write the trajectory as CSV.
    Solve(SolveArgs),
    /// Measure errors and convergence slopes under timestep halving.
    Convergence(ConvergenceArgs),
    /// List the built-in problems.
    ListProblems,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScheduleArg {
    Fixed,
    Geometric,
}

#[derive(clap::Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    problem: String,
    /// Nominal order p (M = p - 1 subintervals, K = p corrections).
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=10))]
    order: Option<u32>,
    /// Override the number of subintervals.
    #[arg(long = "M")]
    subintervals: Option<usize>,
    /// Override the number of corrections.
    #[arg(long = "K")]
    corrections: Option<usize>,
    /// Constant timestep.
    #[arg(long, conflicts_with_all = ["dt0"])]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    schedule: Option<ScheduleArg>,
    /// First step of a geometric schedule.
    #[arg(long)]
    dt0: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct ConvergenceArgs {
    #[arg(long)]
    problem: String,
    /// Comma-separated nominal orders.
    #[arg(long, value_delimiter = ',', required = true)]
    orders: Vec<u32>,
    /// Number of timesteps in the halving sequence.
    #[arg(long)]
    refinements: usize,
    /// Coarsest timestep; defaults to the problem's timestep.
    #[arg(long)]
    dt0: Option<f64>,
    #[arg(long = "M")]
    subintervals: Option<usize>,
    #[arg(long = "K")]
    corrections: Option<usize>,
    /// Output directory, one `<problem>_order<p>.csv` per order; standard
    /// output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Core(err)
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::Validation(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Convergence(args) => convergence(args),
        Command::ListProblems => list_problems(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Core(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_numerical() { 2 } else { 1 })
        }
    }
}

fn mpdec_config(order: Option<u32>, subintervals: Option<usize>, corrections: Option<usize>) -> Result<MPDeCConfig, CliError> {
    let (m, k) = match (order, subintervals, corrections) {
        (_, Some(m), Some(k)) => (m, k),
        (Some(p), m, k) => {
            let p = p as usize;
            (m.unwrap_or(p - 1), k.unwrap_or(p))
        }
        (None, _, _) => {
            return Err(CliError::Validation(
                "either --order or both --M and --K are required".into(),
            ))
        }
    };
    Ok(MPDeCConfig::new(m, k)?)
}

fn schedule_for(problem: &BenchmarkProblem, args: &SolveArgs) -> Result<StepSchedule, CliError> {
    let t_end = args.t_end.unwrap_or(problem.t_end);
    let kind = match (args.schedule, args.dt, args.dt0) {
        (Some(ScheduleArg::Geometric), Some(_), _) => {
            return Err(CliError::Validation("--dt cannot be used with a geometric schedule".into()))
        }
        (Some(ScheduleArg::Fixed), _, Some(_)) => {
            return Err(CliError::Validation("--dt0 requires --schedule geometric".into()))
        }
        (_, Some(dt), _) => ScheduleKind::Fixed { dt },
        (Some(ScheduleArg::Geometric), None, dt0) => ScheduleKind::Geometric {
            dt0: dt0.unwrap_or(problem.default_dt()),
        },
        (Some(ScheduleArg::Fixed), None, None) => ScheduleKind::Fixed {
            dt: problem.default_dt(),
        },
        (None, None, Some(dt0)) => ScheduleKind::Geometric { dt0 },
        (None, None, None) => problem.schedule,
    };
    let schedule = match kind {
        ScheduleKind::Fixed { dt } => StepSchedule::fixed(problem.t_start, dt, t_end)?,
        ScheduleKind::Geometric { dt0 } => StepSchedule::geometric(problem.t_start, dt0, t_end)?,
    };
    Ok(schedule)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Validation(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    let problem = problems::by_name(&args.problem)?;
    let config = mpdec_config(args.order, args.subintervals, args.corrections)?;
    let schedule = schedule_for(&problem, &args)?;
    let traj = integrate(&problem.system, &problem.c0, &schedule, &config)?;

    let mut out = open_output(args.out.as_deref())?;
    write_trajectory_csv(&traj, &mut out)?;
    out.flush()?;

    eprintln!(
        "{}: M={} K={} steps={} t_end={:e} min={:e} sum drift={:e}",
        problem.name(),
        config.subintervals(),
        config.corrections(),
        traj.num_steps(),
        traj.final_time(),
        traj.min_entry(),
        traj.max_relative_sum_drift()
    );
    Ok(())
}

fn convergence(args: ConvergenceArgs) -> Result<(), CliError> {
    let problem = problems::by_name(&args.problem)?;
    if args.refinements < 2 {
        return Err(CliError::Validation("--refinements must be at least 2".into()));
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
    }
    let dts = halving_sequence(args.dt0.unwrap_or(problem.default_dt()), args.refinements);
    for &order in &args.orders {
        if !(1..=10).contains(&order) {
            return Err(CliError::Validation(format!("order {order} outside 1..=10")));
        }
        let scheme = Scheme::MPDeC(mpdec_config(Some(order), args.subintervals, args.corrections)?);
        let report = convergence_study(&problem, &scheme, &dts)?;
        match &args.out {
            Some(dir) => {
                let path = dir.join(format!("{}_order{order}.csv", problem.name()));
                let mut out = open_output(Some(&path))?;
                write_error_report_csv(&report, &mut out)?;
                out.flush()?;
            }
            None => {
                let mut out = io::stdout().lock();
                writeln!(out, "# problem={} scheme={}", report.problem, report.scheme)?;
                write_error_report_csv(&report, &mut out)?;
            }
        }
        match report.last_valid_slope() {
            Some(s) => eprintln!("{} order {order}: last valid slope {s:.3}", report.scheme),
            None => eprintln!("{} order {order}: slope undefined", report.scheme),
        }
    }
    Ok(())
}

fn list_problems() -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    for name in PROBLEM_NAMES {
        let p = problems::by_name(name)?;
        let schedule = match p.schedule {
            ScheduleKind::Fixed { dt } => format!("fixed dt={dt}"),
            ScheduleKind::Geometric { dt0 } => format!("geometric dt0={dt0:e}"),
        };
        writeln!(
            out,
            "{name}\tI={}\tspan=[{}, {:e}]\t{schedule}",
            p.system.dimension(),
            p.t_start,
            p.t_end
        )?;
    }
    Ok(())
}
