//! Error metrics, convergence studies and CSV output.

use std::io::Write;

use crate::baselines::Scheme;
use crate::error::{Error, Result};
use crate::mpdec::{StepSchedule, Trajectory};
use crate::pds::StateVector;
use crate::problems::BenchmarkProblem;

/// Errors below this level are dominated by round-off; refinement pairs with
/// both errors under it do not count towards slope estimates.
pub const PRECISION_FLOOR: f64 = 1e-13;

/// Time-averaged root-mean-square error against an exact solution:
///
/// `E = 1/N sum_{n=1..N} ( 1/I sum_i (c_i(t^n) - c_i^n)^2 )^{1/2}`.
///
/// The initial state is not counted. Returns zero for a trajectory without
/// steps.
pub fn discrete_l2_error<F>(trajectory: &Trajectory, exact: F) -> f64
where
    F: Fn(f64) -> StateVector,
{
    let steps = trajectory.num_steps();
    if steps == 0 {
        return 0.0;
    }
    let total: f64 = (1..=steps)
        .map(|n| rms_difference(&exact(trajectory.times[n]), &trajectory.states[n]))
        .sum();
    total / steps as f64
}

/// Same metric as [`discrete_l2_error`] with the exact solution replaced by
/// the run on the twice finer grid: `c_{N}^n` is compared with `c_{2N}^{2n}`.
pub fn successive_refinement_error(coarse: &Trajectory, fine: &Trajectory) -> Result<f64> {
    let n = coarse.num_steps();
    if fine.num_steps() != 2 * n {
        return Err(Error::MisalignedTrajectories(format!(
            "fine run has {} steps, expected {}",
            fine.num_steps(),
            2 * n
        )));
    }
    if coarse.dimension() != fine.dimension() {
        return Err(Error::MisalignedTrajectories("dimensions differ".into()));
    }
    let scale = coarse.times.iter().fold(1.0_f64, |acc, t| acc.max(t.abs()));
    for k in 0..=n {
        if (coarse.times[k] - fine.times[2 * k]).abs() > 1e-12 * scale {
            return Err(Error::MisalignedTrajectories(format!(
                "time level {k}: {} vs {}",
                coarse.times[k],
                fine.times[2 * k]
            )));
        }
    }
    if n == 0 {
        return Ok(0.0);
    }
    let total: f64 = (1..=n)
        .map(|k| rms_difference(&fine.states[2 * k], &coarse.states[k]))
        .sum();
    Ok(total / n as f64)
}

/// Max-norm error at the final time.
pub fn final_time_max_error<F>(trajectory: &Trajectory, exact: F) -> f64
where
    F: Fn(f64) -> StateVector,
{
    let reference = exact(trajectory.final_time());
    trajectory
        .final_state()
        .iter()
        .zip(reference.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn rms_difference(a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (sq / a.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub dt: f64,
    pub error: f64,
    /// `log(E_prev / E) / log(dt_prev / dt)`; `None` on the first row or
    /// when either error vanishes.
    pub slope: Option<f64>,
    /// Both errors of the pair feeding `slope` are below [`PRECISION_FLOOR`].
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub problem: String,
    pub scheme: String,
    pub order: usize,
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn from_errors(problem: &str, scheme: &str, order: usize, dts: &[f64], errors: &[f64]) -> Self {
        let mut rows: Vec<ErrorRow> = Vec::with_capacity(dts.len());
        for (k, (&dt, &error)) in dts.iter().zip(errors).enumerate() {
            let (slope, saturated) = if k == 0 {
                (None, false)
            } else {
                let prev = &rows[k - 1];
                let slope = if prev.error > 0.0 && error > 0.0 {
                    Some((prev.error / error).ln() / (prev.dt / dt).ln())
                } else {
                    None
                };
                (slope, prev.error < PRECISION_FLOOR && error < PRECISION_FLOOR)
            };
            rows.push(ErrorRow {
                dt,
                error,
                slope,
                saturated,
            });
        }
        Self {
            problem: problem.to_string(),
            scheme: scheme.to_string(),
            order,
            rows,
        }
    }

    /// Slope of the last refinement pair that is not saturated.
    pub fn last_valid_slope(&self) -> Option<f64> {
        self.rows
            .iter()
            .rev()
            .filter(|r| !r.saturated)
            .find_map(|r| r.slope)
    }

    pub fn slopes(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.slope).collect()
    }
}

/// Runs `scheme` on `problem` for each timestep in `dts` (strictly
/// decreasing) and reports errors and pairwise slopes.
///
/// Problems with a closed-form solution use [`discrete_l2_error`]; the
/// others compare each run with a run on the twice finer grid, which needs
/// `dt` to divide the time span.
pub fn convergence_study(problem: &BenchmarkProblem, scheme: &Scheme, dts: &[f64]) -> Result<ErrorReport> {
    if dts.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidConfig("refinement timesteps must be strictly decreasing".into()));
    }
    let errors: Vec<Result<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = dts
            .iter()
            .map(|&dt| scope.spawn(move || refinement_error(problem, scheme, dt)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("refinement worker panicked"))
            .collect()
    });
    let errors = errors.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(ErrorReport::from_errors(
        problem.name(),
        &scheme.label(),
        scheme.order(),
        dts,
        &errors,
    ))
}

/// `count` timesteps `dt0, dt0/2, dt0/4, ...`.
pub fn halving_sequence(dt0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| dt0 / 2f64.powi(j as i32)).collect()
}

fn refinement_error(problem: &BenchmarkProblem, scheme: &Scheme, dt: f64) -> Result<f64> {
    let system = &problem.system;
    if system.has_analytic_solution() {
        let schedule = StepSchedule::fixed(problem.t_start, dt, problem.t_end)?;
        let traj = scheme.integrate(system, &problem.c0, &schedule)?;
        return Ok(discrete_l2_error(&traj, |t| {
            system.analytic_solution(t).expect("checked above")
        }));
    }
    let span = problem.t_end - problem.t_start;
    let n = (span / dt).round();
    if n < 1.0 || (n * dt - span).abs() > 1e-9 * span {
        return Err(Error::InvalidSchedule(format!(
            "dt = {dt} does not divide the time span {span}"
        )));
    }
    let n = n as usize;
    let coarse = scheme.integrate(system, &problem.c0, &StepSchedule::uniform(problem.t_start, problem.t_end, n)?)?;
    let fine = scheme.integrate(system, &problem.c0, &StepSchedule::uniform(problem.t_start, problem.t_end, 2 * n)?)?;
    successive_refinement_error(&coarse, &fine)
}

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Trajectory CSV: header `t,c_1,...,c_I,sum`, 17 significant digits, LF.
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, out: &mut W) -> Result<()> {
    let dim = trajectory.dimension();
    let mut header = String::from("t");
    for i in 1..=dim {
        header.push_str(&format!(",c_{i}"));
    }
    header.push_str(",sum\n");
    out.write_all(header.as_bytes())?;
    for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
        let mut line = fmt_real(*t);
        for v in state.iter() {
            line.push(',');
            line.push_str(&fmt_real(*v));
        }
        line.push(',');
        line.push_str(&fmt_real(state.sum()));
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_trajectory_csv(trajectory, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Parses the output of [`write_trajectory_csv`]. The `sum` column is
/// ignored.
pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 3 || columns[0] != "t" || columns[columns.len() - 1] != "sum" {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header `{header}`"),
        });
    }
    let dim = columns.len() - 2;
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (idx, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {} fields, found {}", dim + 2, fields.len()),
            });
        }
        let values = fields[..=dim]
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("`{f}`: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        times.push(values[0]);
        states.push(StateVector::new(values[1..].to_vec()));
    }
    Ok(Trajectory { times, states })
}

/// Error-report CSV: header `dt,error,slope`, slope left empty when
/// undefined.
pub fn write_error_report_csv<W: Write>(report: &ErrorReport, out: &mut W) -> Result<()> {
    out.write_all(b"dt,error,slope\n")?;
    for row in &report.rows {
        let slope = row.slope.map(fmt_real).unwrap_or_default();
        writeln!(out, "{},{},{}", fmt_real(row.dt), fmt_real(row.error), slope)?;
    }
    Ok(())
}

pub fn error_report_csv(report: &ErrorReport) -> String {
    let mut buf = Vec::new();
    write_error_report_csv(report, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}
