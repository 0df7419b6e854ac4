//! Modified Patankar deferred correction (mPDeC).
//!
//! Every timestep `[t^n, t^n + dt]` is split into `M` equispaced
//! subintervals. Starting from the constant grid `c^{m,(0)} = c^n`, each of
//! the `K` corrections solves, independently for every subtimestep `m`, the
//! linear system
//!
//! ```text
//! M(c^{m,(k-1)}) c^{m,(k)} = c^n
//! ```
//!
//! whose matrix collects the quadrature-weighted production and destruction
//! terms of the previous correction. Terms with a positive weight are
//! Patankar-weighted the usual way (destruction on the diagonal, production
//! off it); terms with a negative weight swap roles, which keeps a positive
//! diagonal, a nonpositive off-diagonal and strict column diagonal
//! dominance. The columns of the matrix sum to one, which makes every
//! correction conservative, and its inverse is nonnegative, which keeps
//! every state positive for any `dt`.
//!
//! The scheme has order `min(M + 1, K)`.

use std::sync::Arc;

use crate::dec_tables::DecTables;
use crate::error::{Error, Result};
use crate::linear_solve::{solve_with_tolerance, DenseMatrix};
use crate::pds::{ProductionDestructionSystem, RateTables, StateVector};

/// Positivity floor applied to initial data (`2.22e-16`).
pub const DEFAULT_POSITIVITY_FLOOR: f64 = 2.22e-16;

/// Chooses which constituent's Patankar weight a term carries: `a` for a
/// positive quadrature weight, `b` for a negative one. Zero weights
/// contribute nothing and select no index.
pub fn gamma(a: usize, b: usize, theta: f64) -> Option<usize> {
    if theta > 0.0 {
        Some(a)
    } else if theta < 0.0 {
        Some(b)
    } else {
        None
    }
}

/// Subintervals, corrections and numerical knobs for an mPDeC run.
#[derive(Debug, Clone)]
pub struct MPDeCConfig {
    corrections: usize,
    positivity_floor: f64,
    solver_tolerance: f64,
    tables: Arc<DecTables>,
}

impl MPDeCConfig {
    /// `subintervals = M`, `corrections = K`.
    pub fn new(subintervals: usize, corrections: usize) -> Result<Self> {
        if corrections == 0 {
            return Err(Error::InvalidConfig("at least one correction is required".into()));
        }
        Ok(Self {
            corrections,
            positivity_floor: DEFAULT_POSITIVITY_FLOOR,
            solver_tolerance: 0.0,
            tables: Arc::new(DecTables::build(subintervals)?),
        })
    }

    /// Scheme of nominal order `p`: `M = p - 1` subintervals, `K = p`
    /// corrections. Order 1 is the modified Patankar Euler step (`M = K = 1`).
    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            0 => Err(Error::InvalidConfig("order must be at least 1".into())),
            1 => Self::new(1, 1),
            p => Self::new(p - 1, p),
        }
    }

    pub fn with_positivity_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor > 0.0) || !floor.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "positivity floor must be positive and finite, got {floor}"
            )));
        }
        self.positivity_floor = floor;
        Ok(self)
    }

    /// Relative pivot threshold below which a mass matrix is reported
    /// singular. Zero only rejects exactly vanishing pivots.
    pub fn with_solver_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "solver tolerance must be nonnegative and finite, got {tol}"
            )));
        }
        self.solver_tolerance = tol;
        Ok(self)
    }

    pub fn subintervals(&self) -> usize {
        self.tables.subintervals()
    }

    pub fn corrections(&self) -> usize {
        self.corrections
    }

    /// Expected order of accuracy, `min(M + 1, K)`.
    pub fn order(&self) -> usize {
        (self.subintervals() + 1).min(self.corrections)
    }

    pub fn positivity_floor(&self) -> f64 {
        self.positivity_floor
    }

    pub fn solver_tolerance(&self) -> f64 {
        self.solver_tolerance
    }

    pub fn tables(&self) -> &DecTables {
        &self.tables
    }
}

/// States of all `M + 1` subtimesteps for one correction, together with
/// the rate tables evaluated at each of them.
#[derive(Debug, Clone)]
pub struct CorrectionGrid {
    states: Vec<StateVector>,
    rates: Vec<RateTables>,
}

impl CorrectionGrid {
    /// The zeroth correction: every subtimestep holds `c0`.
    pub fn initial(system: &ProductionDestructionSystem, c0: &StateVector, subintervals: usize) -> Result<Self> {
        let rates = system.evaluate_rates(c0)?;
        Ok(Self {
            states: vec![c0.clone(); subintervals + 1],
            rates: vec![rates; subintervals + 1],
        })
    }

    pub fn from_states(system: &ProductionDestructionSystem, states: Vec<StateVector>) -> Result<Self> {
        let rates = states
            .iter()
            .map(|c| system.evaluate_rates(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { states, rates })
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn rates(&self) -> &[RateTables] {
        &self.rates
    }

    pub fn subintervals(&self) -> usize {
        self.states.len() - 1
    }

    pub fn into_states(self) -> Vec<StateVector> {
        self.states
    }
}

/// Mass matrix of the correction solve at subtimestep `m`, built from the
/// previous correction `grid`.
///
/// Self-exchange entries `p_ii`, `d_ii` cancel in the right-hand side of a
/// conservative system and are left out.
pub fn assemble_mass_matrix(grid: &CorrectionGrid, tables: &DecTables, m: usize, dt: f64) -> Result<DenseMatrix> {
    if grid.subintervals() != tables.subintervals() {
        return Err(Error::DimensionMismatch {
            expected: tables.subintervals() + 1,
            found: grid.states.len(),
        });
    }
    let denominators = &grid.states[m];
    denominators.ensure_positive()?;
    let n = denominators.len();
    let mut mass = DenseMatrix::identity(n);

    for (r, &theta) in tables.theta_row(m).iter().enumerate() {
        if theta == 0.0 {
            continue;
        }
        let weight = dt * theta;
        let p = &grid.rates[r].production;
        let d = &grid.rates[r].destruction;
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                if theta > 0.0 {
                    // production weighted by c_j, destruction by c_i
                    mass[(i, j)] -= weight * p[(i, j)] / denominators[j];
                    mass[(i, i)] += weight * d[(i, j)] / denominators[i];
                } else {
                    mass[(i, j)] += weight * d[(i, j)] / denominators[j];
                    mass[(i, i)] -= weight * p[(i, j)] / denominators[i];
                }
            }
        }
    }
    Ok(mass)
}

/// Solves the correction at a single subtimestep `m`.
pub fn solve_subtimestep(
    prev: &CorrectionGrid,
    tables: &DecTables,
    m: usize,
    dt: f64,
    c0: &StateVector,
    solver_tolerance: f64,
) -> Result<StateVector> {
    let mass = assemble_mass_matrix(prev, tables, m, dt)?;
    let solution = StateVector::new(solve_with_tolerance(&mass, c0, solver_tolerance)?);
    solution.ensure_positive()?;
    Ok(solution)
}

fn sweep_states(
    prev: &CorrectionGrid,
    tables: &DecTables,
    dt: f64,
    c0: &StateVector,
    solver_tolerance: f64,
) -> Result<Vec<StateVector>> {
    let mut states = Vec::with_capacity(prev.states.len());
    states.push(c0.clone());
    for m in 1..=tables.subintervals() {
        states.push(solve_subtimestep(prev, tables, m, dt, c0, solver_tolerance)?);
    }
    Ok(states)
}

/// One correction: returns the grid `c^{(k)}` from `c^{(k-1)}`.
pub fn correction_sweep(
    system: &ProductionDestructionSystem,
    prev: &CorrectionGrid,
    tables: &DecTables,
    dt: f64,
    c0: &StateVector,
) -> Result<CorrectionGrid> {
    let states = sweep_states(prev, tables, dt, c0, 0.0)?;
    next_grid(system, prev, states)
}

fn next_grid(system: &ProductionDestructionSystem, prev: &CorrectionGrid, states: Vec<StateVector>) -> Result<CorrectionGrid> {
    // the first subtimestep never changes, so its rates carry over
    let mut rates = Vec::with_capacity(states.len());
    rates.push(prev.rates[0].clone());
    for c in &states[1..] {
        rates.push(system.evaluate_rates(c)?);
    }
    Ok(CorrectionGrid { states, rates })
}

/// Advances `c_n` by one mPDeC step of size `dt`.
pub fn mpdec_step(
    system: &ProductionDestructionSystem,
    c_n: &StateVector,
    dt: f64,
    config: &MPDeCConfig,
) -> Result<StateVector> {
    if c_n.len() != system.dimension() {
        return Err(Error::DimensionMismatch {
            expected: system.dimension(),
            found: c_n.len(),
        });
    }
    c_n.ensure_positive()?;
    check_step_size(dt)?;

    let tables = config.tables();
    let mut grid = CorrectionGrid::initial(system, c_n, tables.subintervals())?;
    for k in 1..=config.corrections() {
        let states = sweep_states(&grid, tables, dt, c_n, config.solver_tolerance())?;
        if k == config.corrections() {
            return Ok(states.into_iter().last().expect("at least one subinterval"));
        }
        grid = next_grid(system, &grid, states)?;
    }
    unreachable!("corrections >= 1")
}

pub(crate) fn check_step_size(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSchedule(format!("timestep must be positive and finite, got {dt}")))
    }
}

/// Ordered time levels `t_0 < t_1 < ... < t_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSchedule {
    times: Vec<f64>,
}

impl StepSchedule {
    /// Constant steps `dt` from `t0`; the last step is shortened so the
    /// schedule ends exactly at `t_end`.
    pub fn fixed(t0: f64, dt: f64, t_end: f64) -> Result<Self> {
        check_step_size(dt)?;
        check_span(t0, t_end)?;
        let span = t_end - t0;
        let ratio = span / dt;
        let mut full = ratio.floor();
        // treat a remainder at round-off level as an exact fit
        if ratio - full > 1.0 - 1e-10 {
            full += 1.0;
        }
        let full = full as usize;
        let mut times: Vec<f64> = (0..=full).map(|k| t0 + k as f64 * dt).collect();
        let last = *times.last().unwrap();
        if (t_end - last).abs() <= 1e-10 * dt {
            *times.last_mut().unwrap() = t_end;
        } else if last < t_end {
            times.push(t_end);
        } else {
            times.pop();
            times.push(t_end);
        }
        Self::from_times(times)
    }

    /// `n` equal steps covering `[t0, t_end]`.
    pub fn uniform(t0: f64, t_end: f64, n: usize) -> Result<Self> {
        check_span(t0, t_end)?;
        if n == 0 {
            return Err(Error::InvalidSchedule("uniform schedule needs at least one step".into()));
        }
        let dt = (t_end - t0) / n as f64;
        let mut times: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * dt).collect();
        times[n] = t_end;
        Self::from_times(times)
    }

    /// Doubling steps `dt_n = 2^{n-1} dt0` until `t_end` is reached or
    /// passed. The last step is not truncated.
    pub fn geometric(t0: f64, dt0: f64, t_end: f64) -> Result<Self> {
        check_step_size(dt0)?;
        check_span(t0, t_end)?;
        let mut times = vec![t0];
        let mut dt = dt0;
        let mut t = t0;
        while t < t_end {
            t += dt;
            times.push(t);
            dt *= 2.0;
        }
        Self::from_times(times)
    }

    /// Splits every step into `factor` equal substeps.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidSchedule("refinement factor must be positive".into()));
        }
        let mut times = vec![self.times[0]];
        for w in self.times.windows(2) {
            let h = (w[1] - w[0]) / factor as f64;
            for k in 1..factor {
                times.push(w[0] + k as f64 * h);
            }
            times.push(w[1]);
        }
        Self::from_times(times)
    }

    /// Schedule with only the initial time and no steps.
    pub fn empty(t0: f64) -> Self {
        Self { times: vec![t0] }
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidSchedule("no time levels".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidSchedule("non-finite time level".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSchedule("time levels must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn num_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }
}

fn check_span(t0: f64, t_end: f64) -> Result<()> {
    if t0.is_finite() && t_end.is_finite() && t_end > t0 {
        Ok(())
    } else {
        Err(Error::InvalidSchedule(format!("invalid time span [{t0}, {t_end}]")))
    }
}

/// Time levels and states produced by an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
}

impl Trajectory {
    pub fn new(t0: f64, c0: StateVector) -> Self {
        Self {
            times: vec![t0],
            states: vec![c0],
        }
    }

    pub fn push(&mut self, t: f64, c: StateVector) {
        self.times.push(t);
        self.states.push(c);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of steps, one less than the number of stored states.
    pub fn num_steps(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    pub fn dimension(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one state")
    }

    /// `max_n |sum(c^n) - sum(c^0)| / |sum(c^0)|`.
    pub fn max_relative_sum_drift(&self) -> f64 {
        let initial = self.states[0].sum();
        self.states
            .iter()
            .map(|s| (s.sum() - initial).abs() / initial.abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|s| s.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// Component `i` over time, scaled by `factor`. For plotting small
    /// components; stored states are never rescaled.
    pub fn scaled_component(&self, i: usize, factor: f64) -> Vec<f64> {
        self.states.iter().map(|s| s[i] * factor).collect()
    }
}

/// Integrates `c0` over `schedule` with mPDeC. Initial entries below the
/// positivity floor are raised to it.
pub fn integrate(
    system: &ProductionDestructionSystem,
    c0: &StateVector,
    schedule: &StepSchedule,
    config: &MPDeCConfig,
) -> Result<Trajectory> {
    if c0.len() != system.dimension() {
        return Err(Error::DimensionMismatch {
            expected: system.dimension(),
            found: c0.len(),
        });
    }
    let start = c0.floored(config.positivity_floor())?;
    let mut trajectory = Trajectory::new(schedule.t0(), start);
    for (dt, &t) in schedule.steps().zip(&schedule.times()[1..]) {
        let next = mpdec_step(system, trajectory.final_state(), dt, config)?;
        trajectory.push(t, next);
    }
    Ok(trajectory)
}
