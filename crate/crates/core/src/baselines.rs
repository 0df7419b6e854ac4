//! Reference and contrast schemes.
//!
//! None of these are the production integrator; they exist to show what the
//! modified Patankar deferred correction fixes (explicit Euler and classical
//! DeC lose positivity, Patankar Euler loses conservation) and to provide
//! oracles and reference solutions.

use crate::dec_tables::DecTables;
use crate::error::{Error, Result};
use crate::linear_solve::{solve, DenseMatrix};
use crate::mpdec::{check_step_size, integrate, MPDeCConfig, StepSchedule, Trajectory};
use crate::pds::{ProductionDestructionSystem, StateVector};

fn axpy(c: &[f64], dt: f64, e: &[f64]) -> StateVector {
    c.iter().zip(e).map(|(x, y)| x + dt * y).collect::<Vec<_>>().into()
}

/// `c + dt * E(c)`. Conservative, not positivity preserving.
pub fn explicit_euler_step(system: &ProductionDestructionSystem, c: &StateVector, dt: f64) -> Result<StateVector> {
    Ok(axpy(c, dt, &system.total_exchange(c)?))
}

/// Patankar's weighting of the destruction terms only:
/// `c_i' = (c_i + dt P_i) / (1 + dt D_i / c_i)`.
///
/// Unconditionally positive, not conservative.
pub fn patankar_euler_step(system: &ProductionDestructionSystem, c: &StateVector, dt: f64) -> Result<StateVector> {
    c.ensure_positive()?;
    let rates = system.evaluate_rates(c)?;
    let next = (0..c.len())
        .map(|i| {
            let production: f64 = rates.production.row(i).iter().sum();
            let destruction: f64 = rates.destruction.row(i).iter().sum();
            (c[i] + dt * production) / (1.0 + dt * destruction / c[i])
        })
        .collect::<Vec<_>>();
    Ok(next.into())
}

/// Mass matrix of the modified Patankar Euler scheme:
/// `m_ii = 1 + dt sum_k d_ik / c_i`, `m_ij = -dt p_ij / c_j`.
pub fn modified_patankar_euler_matrix(system: &ProductionDestructionSystem, c: &StateVector, dt: f64) -> Result<DenseMatrix> {
    c.ensure_positive()?;
    let rates = system.evaluate_rates(c)?;
    let n = c.len();
    let mut mass = DenseMatrix::identity(n);
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            mass[(i, i)] += dt * rates.destruction[(i, j)] / c[i];
            mass[(i, j)] = -dt * rates.production[(i, j)] / c[j];
        }
    }
    Ok(mass)
}

/// Modified Patankar Euler: production weighted by `c_j^{n+1}/c_j^n`,
/// destruction by `c_i^{n+1}/c_i^n`. Positive and conservative.
pub fn modified_patankar_euler_step(system: &ProductionDestructionSystem, c: &StateVector, dt: f64) -> Result<StateVector> {
    let mass = modified_patankar_euler_matrix(system, c, dt)?;
    Ok(solve(&mass, c)?.into())
}

/// Classical explicit deferred correction with `subintervals` equispaced
/// subintervals and `corrections` iterations:
/// `c^{m,(k)} = c^0 + dt sum_r theta[m][r] E(c^{r,(k-1)})`.
///
/// Conservative and of order `min(M + 1, K)`, but negative quadrature
/// weights can drive states negative.
pub fn classical_dec_step(
    system: &ProductionDestructionSystem,
    c: &StateVector,
    dt: f64,
    subintervals: usize,
    corrections: usize,
) -> Result<StateVector> {
    let tables = DecTables::build(subintervals)?;
    classical_dec_step_with(system, c, dt, &tables, corrections)
}

pub fn classical_dec_step_with(
    system: &ProductionDestructionSystem,
    c: &StateVector,
    dt: f64,
    tables: &DecTables,
    corrections: usize,
) -> Result<StateVector> {
    if corrections == 0 {
        return Err(Error::InvalidConfig("at least one correction is required".into()));
    }
    let n = c.len();
    let big_m = tables.subintervals();
    let mut exchange = vec![system.total_exchange(c)?; big_m + 1];
    let mut states = vec![c.clone(); big_m + 1];
    for k in 1..=corrections {
        for (m, state) in states.iter_mut().enumerate().skip(1) {
            let mut next = c.to_vec();
            for (r, &theta) in tables.theta_row(m).iter().enumerate() {
                for i in 0..n {
                    next[i] += dt * theta * exchange[r][i];
                }
            }
            *state = next.into();
        }
        if k < corrections {
            for m in 1..=big_m {
                exchange[m] = system.total_exchange(&states[m])?;
            }
        }
    }
    Ok(states.pop().unwrap())
}

/// Ketcheson's ten-stage, fourth-order strong stability preserving
/// Runge–Kutta method in its two-register low-storage form.
pub fn ssprk104_step(system: &ProductionDestructionSystem, c: &StateVector, dt: f64) -> Result<StateVector> {
    let h6 = dt / 6.0;
    let mut q1 = c.to_vec();
    let mut q2 = c.to_vec();
    let euler = |q: &mut Vec<f64>, h: f64| -> Result<()> {
        let e = system.total_exchange(q)?;
        q.iter_mut().zip(&e).for_each(|(x, y)| *x += h * y);
        Ok(())
    };
    for _ in 0..5 {
        euler(&mut q1, h6)?;
    }
    for (a, b) in q2.iter_mut().zip(q1.iter_mut()) {
        *a = *a / 25.0 + 9.0 * *b / 25.0;
        *b = 15.0 * *a - 5.0 * *b;
    }
    for _ in 0..4 {
        euler(&mut q1, h6)?;
    }
    let e = system.total_exchange(&q1)?;
    let out = (0..q1.len())
        .map(|i| q2[i] + 0.6 * q1[i] + dt / 10.0 * e[i])
        .collect::<Vec<_>>();
    Ok(out.into())
}

/// `n` steps of SSP-RK(10,4) with constant `dt` from `t0`.
pub fn ssprk104_integrate(
    system: &ProductionDestructionSystem,
    c0: &StateVector,
    t0: f64,
    dt: f64,
    n: usize,
) -> Result<Trajectory> {
    check_step_size(dt)?;
    let mut traj = Trajectory::new(t0, c0.clone());
    for k in 1..=n {
        let next = ssprk104_step(system, traj.final_state(), dt)?;
        traj.push(t0 + k as f64 * dt, next);
    }
    Ok(traj)
}

/// The integrators available to the harness and CLI.
#[derive(Debug, Clone)]
pub enum Scheme {
    MPDeC(MPDeCConfig),
    ClassicalDeC { tables: DecTables, corrections: usize },
    ExplicitEuler,
    PatankarEuler,
    ModifiedPatankarEuler,
    SspRk104,
}

impl Scheme {
    pub fn mpdec_order(order: usize) -> Result<Self> {
        Ok(Scheme::MPDeC(MPDeCConfig::from_order(order)?))
    }

    pub fn classical_dec(subintervals: usize, corrections: usize) -> Result<Self> {
        if corrections == 0 {
            return Err(Error::InvalidConfig("at least one correction is required".into()));
        }
        Ok(Scheme::ClassicalDeC {
            tables: DecTables::build(subintervals)?,
            corrections,
        })
    }

    pub fn label(&self) -> String {
        match self {
            Scheme::MPDeC(c) => format!("mpdec(M={},K={})", c.subintervals(), c.corrections()),
            Scheme::ClassicalDeC { tables, corrections } => {
                format!("dec(M={},K={})", tables.subintervals(), corrections)
            }
            Scheme::ExplicitEuler => "explicit-euler".into(),
            Scheme::PatankarEuler => "patankar-euler".into(),
            Scheme::ModifiedPatankarEuler => "modified-patankar-euler".into(),
            Scheme::SspRk104 => "ssprk104".into(),
        }
    }

    /// Nominal order of accuracy.
    pub fn order(&self) -> usize {
        match self {
            Scheme::MPDeC(c) => c.order(),
            Scheme::ClassicalDeC { tables, corrections } => (tables.subintervals() + 1).min(*corrections),
            Scheme::ExplicitEuler | Scheme::PatankarEuler | Scheme::ModifiedPatankarEuler => 1,
            Scheme::SspRk104 => 4,
        }
    }

    pub fn step(&self, system: &ProductionDestructionSystem, c: &StateVector, dt: f64) -> Result<StateVector> {
        match self {
            Scheme::MPDeC(cfg) => crate::mpdec::mpdec_step(system, c, dt, cfg),
            Scheme::ClassicalDeC { tables, corrections } => classical_dec_step_with(system, c, dt, tables, *corrections),
            Scheme::ExplicitEuler => explicit_euler_step(system, c, dt),
            Scheme::PatankarEuler => patankar_euler_step(system, c, dt),
            Scheme::ModifiedPatankarEuler => modified_patankar_euler_step(system, c, dt),
            Scheme::SspRk104 => ssprk104_step(system, c, dt),
        }
    }

    /// Integrates over `schedule`. mPDeC applies its positivity floor to the
    /// initial state; the other schemes take `c0` as given.
    pub fn integrate(
        &self,
        system: &ProductionDestructionSystem,
        c0: &StateVector,
        schedule: &StepSchedule,
    ) -> Result<Trajectory> {
        if let Scheme::MPDeC(cfg) = self {
            return integrate(system, c0, schedule, cfg);
        }
        let mut traj = Trajectory::new(schedule.t0(), c0.clone());
        for (dt, &t) in schedule.steps().zip(&schedule.times()[1..]) {
            let next = self.step(system, traj.final_state(), dt)?;
            traj.push(t, next);
        }
        Ok(traj)
    }
}
