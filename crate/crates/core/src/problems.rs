//! Benchmark production–destruction problems.

use crate::error::{Error, Result};
use crate::mpdec::{StepSchedule, DEFAULT_POSITIVITY_FLOOR};
use crate::pds::{ProductionDestructionSystem, StateVector};

/// Default time stepping of a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    Fixed { dt: f64 },
    /// Doubling steps starting from `dt0`.
    Geometric { dt0: f64 },
}

/// How reference solutions are obtained when no closed form exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceRecipe {
    Analytic,
    /// SSP-RK(10,4) with constant step `dt`.
    SspRk104 { dt: f64 },
    /// mPDeC of the given order on the default schedule with every step
    /// split into `refinement` substeps.
    FineMpdec { order: usize, refinement: usize },
}

#[derive(Debug, Clone)]
pub struct BenchmarkProblem {
    pub system: ProductionDestructionSystem,
    pub c0: StateVector,
    pub t_start: f64,
    pub t_end: f64,
    pub schedule: ScheduleKind,
    pub reference: ReferenceRecipe,
}

impl BenchmarkProblem {
    pub fn name(&self) -> &str {
        self.system.name()
    }

    /// Sum of the initial constituents.
    pub fn conserved_total(&self) -> f64 {
        self.c0.sum()
    }

    pub fn default_schedule(&self) -> Result<StepSchedule> {
        match self.schedule {
            ScheduleKind::Fixed { dt } => StepSchedule::fixed(self.t_start, dt, self.t_end),
            ScheduleKind::Geometric { dt0 } => StepSchedule::geometric(self.t_start, dt0, self.t_end),
        }
    }

    pub fn default_dt(&self) -> f64 {
        match self.schedule {
            ScheduleKind::Fixed { dt } => dt,
            ScheduleKind::Geometric { dt0 } => dt0,
        }
    }
}

pub const PROBLEM_NAMES: [&str; 3] = ["linear", "algal", "robertson"];

pub fn by_name(name: &str) -> Result<BenchmarkProblem> {
    match name {
        "linear" => Ok(linear_problem()),
        "algal" | "nonlinear" => Ok(nonlinear_problem()),
        "robertson" => Ok(robertson_problem()),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

pub fn all_problems() -> Vec<BenchmarkProblem> {
    vec![linear_problem(), nonlinear_problem(), robertson_problem()]
}

/// Two-constituent linear exchange `c_1' = c_2 - 5 c_1`, `c_2' = 5 c_1 - c_2`
/// from `(0.9, 0.1)` on `[0, 1.75]`.
///
/// The exact solution is `c_1(t) = 1/6 + (c_1(0) - 1/6) e^{-6t}`,
/// `c_2 = 1 - c_1`.
pub fn linear_problem() -> BenchmarkProblem {
    let c1_0 = 0.9;
    let system = ProductionDestructionSystem::from_production("linear", 2, |c, p| {
        p[(0, 1)] = c[1];
        p[(1, 0)] = 5.0 * c[0];
    })
    .with_analytic_solution(move |t| {
        let c1 = 1.0 / 6.0 + (c1_0 - 1.0 / 6.0) * (-6.0 * t).exp();
        StateVector::new(vec![c1, 1.0 - c1])
    });
    BenchmarkProblem {
        system,
        c0: StateVector::new(vec![c1_0, 0.1]),
        t_start: 0.0,
        t_end: 1.75,
        schedule: ScheduleKind::Fixed { dt: 0.25 },
        reference: ReferenceRecipe::Analytic,
    }
}

/// Algal bloom: nutrients `c_1` are taken up by phytoplankton `c_2`, which
/// decays into detritus `c_3`.
pub fn nonlinear_problem() -> BenchmarkProblem {
    let system = ProductionDestructionSystem::from_production("algal", 3, |c, p| {
        p[(1, 0)] = c[0] * c[1] / (c[0] + 1.0);
        p[(2, 1)] = 0.3 * c[1];
    });
    BenchmarkProblem {
        system,
        c0: StateVector::new(vec![9.98, 0.01, 0.01]),
        t_start: 0.0,
        t_end: 30.0,
        schedule: ScheduleKind::Fixed { dt: 0.5 },
        reference: ReferenceRecipe::SspRk104 { dt: 1e-3 },
    }
}

/// Robertson's stiff chemical kinetics, started from `(1 - 2 eps, eps, eps)`
/// and stepped with doubling timesteps from `1e-6` up to `1e10`.
pub fn robertson_problem() -> BenchmarkProblem {
    let eps = DEFAULT_POSITIVITY_FLOOR;
    let system = ProductionDestructionSystem::from_production("robertson", 3, |c, p| {
        p[(0, 1)] = 1e4 * c[1] * c[2];
        p[(1, 0)] = 0.04 * c[0];
        p[(2, 1)] = 3e7 * c[1] * c[1];
    });
    BenchmarkProblem {
        system,
        c0: StateVector::new(vec![1.0 - 2.0 * eps, eps, eps]),
        t_start: 0.0,
        t_end: 1e10,
        schedule: ScheduleKind::Geometric { dt0: 1e-6 },
        reference: ReferenceRecipe::FineMpdec {
            order: 5,
            refinement: 32,
        },
    }
}
