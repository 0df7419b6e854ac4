//! Production–destruction systems.
//!
//! A system of `I` constituents evolves as `c_i' = P_i(c) - D_i(c)` where
//! `P_i = sum_j p_ij(c)` and `D_i = sum_j d_ij(c)`. The entry `p_ij` is the
//! rate at which constituent `j` turns into `i`, `d_ij` the rate at which
//! `i` turns into `j`. A conservative system satisfies `p_ij = d_ji`.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, RateKind, Result};
use crate::linear_solve::DenseMatrix;

/// Concentrations of the `I` constituents at one (sub)timestep.
#[derive(Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Fails on the first entry that is not finite and strictly positive.
    pub fn ensure_positive(&self) -> Result<()> {
        for (index, &value) in self.0.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteState { index, value });
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveState { index, value });
            }
        }
        Ok(())
    }

    /// Raises entries in `[0, floor)` to `floor`. Negative or non-finite
    /// entries are rejected rather than masked.
    pub fn floored(&self, floor: f64) -> Result<Self> {
        self.0
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                if !value.is_finite() {
                    Err(Error::NonFiniteState { index, value })
                } else if value < 0.0 {
                    Err(Error::NonPositiveState { index, value })
                } else {
                    Ok(value.max(floor))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl From<&[f64]> for StateVector {
    fn from(values: &[f64]) -> Self {
        Self(values.to_vec())
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Production (`p_ij`) and destruction (`d_ij`) tables evaluated at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTables {
    pub production: DenseMatrix,
    pub destruction: DenseMatrix,
}

impl RateTables {
    pub fn zeros(dim: usize) -> Self {
        Self {
            production: DenseMatrix::zeros(dim),
            destruction: DenseMatrix::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.production.dim()
    }

    /// Row sums of `P - D`, i.e. the right-hand side `E_i(c)`.
    pub fn exchange(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let p: f64 = self.production.row(i).iter().sum();
                let d: f64 = self.destruction.row(i).iter().sum();
                p - d
            })
            .collect()
    }
}

/// Declared conservation structure of a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conservation {
    NonConservative,
    /// `p_ij = d_ji` for `i != j`.
    Conservative,
    /// Conservative with `p_ii = d_ii = 0`.
    FullyConservative,
}

/// Fills the production and destruction tables (both pre-zeroed) for a state.
pub type RateFn = dyn Fn(&[f64], &mut DenseMatrix, &mut DenseMatrix) + Send + Sync;

pub type SolutionFn = dyn Fn(f64) -> StateVector + Send + Sync;

/// A production–destruction ODE system given by its rate tables.
#[derive(Clone)]
pub struct ProductionDestructionSystem {
    name: String,
    dimension: usize,
    conservation: Conservation,
    rates: Arc<RateFn>,
    analytic: Option<Arc<SolutionFn>>,
}

impl ProductionDestructionSystem {
    pub fn new<F>(name: impl Into<String>, dimension: usize, conservation: Conservation, rates: F) -> Self
    where
        F: Fn(&[f64], &mut DenseMatrix, &mut DenseMatrix) + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dimension,
            conservation,
            rates: Arc::new(rates),
            analytic: None,
        }
    }

    /// Builds a fully conservative system from its production table alone;
    /// the destruction table is filled as `d_ij = p_ji`.
    pub fn from_production<F>(name: impl Into<String>, dimension: usize, production: F) -> Self
    where
        F: Fn(&[f64], &mut DenseMatrix) + Send + Sync + 'static,
    {
        Self::new(name, dimension, Conservation::FullyConservative, move |c, p, d| {
            production(c, p);
            let n = p.dim();
            for i in 0..n {
                for j in 0..n {
                    d[(j, i)] = p[(i, j)];
                }
            }
        })
    }

    pub fn with_analytic_solution<F>(mut self, solution: F) -> Self
    where
        F: Fn(f64) -> StateVector + Send + Sync + 'static,
    {
        self.analytic = Some(Arc::new(solution));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn conservation(&self) -> Conservation {
        self.conservation
    }

    pub fn has_analytic_solution(&self) -> bool {
        self.analytic.is_some()
    }

    pub fn analytic_solution(&self, t: f64) -> Option<StateVector> {
        self.analytic.as_ref().map(|f| f(t))
    }

    /// Evaluates `p_ij(c)` and `d_ij(c)`. Non-finite entries are rejected;
    /// negative entries are rejected when `c` is nonnegative. Explicit
    /// baselines may leave the positive orthant, where rate signs are the
    /// model's business.
    pub fn evaluate_rates(&self, c: &[f64]) -> Result<RateTables> {
        if c.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: c.len(),
            });
        }
        if let Some((index, &value)) = c.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteState { index, value });
        }
        let mut tables = RateTables::zeros(self.dimension);
        (self.rates)(c, &mut tables.production, &mut tables.destruction);
        let check_sign = c.iter().all(|&v| v >= 0.0);
        validate_table(&tables.production, RateKind::Production, check_sign)?;
        validate_table(&tables.destruction, RateKind::Destruction, check_sign)?;
        Ok(tables)
    }

    /// `E_i(c) = P_i(c) - D_i(c)`.
    pub fn total_exchange(&self, c: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate_rates(c)?.exchange())
    }

    /// Samples `|p_ij(c) - d_ji(c)|` over the given states. Diagonal entries
    /// are only checked (against zero) when the system is declared fully
    /// conservative.
    pub fn check_conservative_structure(
        &self,
        sample_states: &[StateVector],
        tol: f64,
    ) -> Result<ConservationReport> {
        let mut report = ConservationReport {
            tolerance: tol,
            samples: sample_states.len(),
            max_violation: 0.0,
            violations: Vec::new(),
        };
        let check_diagonal = self.conservation == Conservation::FullyConservative;
        for (sample, state) in sample_states.iter().enumerate() {
            let tables = self.evaluate_rates(state)?;
            let n = self.dimension;
            for i in 0..n {
                for j in 0..n {
                    let violation = if i == j {
                        if !check_diagonal {
                            continue;
                        }
                        tables.production[(i, i)]
                            .abs()
                            .max(tables.destruction[(i, i)].abs())
                    } else {
                        (tables.production[(i, j)] - tables.destruction[(j, i)]).abs()
                    };
                    report.max_violation = report.max_violation.max(violation);
                    if violation > tol {
                        report.violations.push(ConservationViolation {
                            i,
                            j,
                            sample,
                            state: state.clone(),
                            magnitude: violation,
                        });
                    }
                }
            }
        }
        Ok(report)
    }
}

impl fmt::Debug for ProductionDestructionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProductionDestructionSystem")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("conservation", &self.conservation)
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

fn validate_table(table: &DenseMatrix, kind: RateKind, check_sign: bool) -> Result<()> {
    let n = table.dim();
    for i in 0..n {
        for j in 0..n {
            let value = table[(i, j)];
            if !value.is_finite() {
                return Err(Error::NonFiniteRate { kind, i, j, value });
            }
            if check_sign && value < 0.0 {
                return Err(Error::NegativeRate { kind, i, j, value });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservationViolation {
    pub i: usize,
    pub j: usize,
    /// Index into the sampled states.
    pub sample: usize,
    pub state: StateVector,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservationReport {
    pub tolerance: f64,
    pub samples: usize,
    pub max_violation: f64,
    pub violations: Vec<ConservationViolation>,
}

impl ConservationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn worst(&self) -> Option<&ConservationViolation> {
        self.violations
            .iter()
            .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }
}
