//! Subtimestep layout and quadrature tables for deferred correction.
//!
//! For `M` subintervals of the unit interval with equispaced nodes
//! `s_m = m / M`, the tables hold
//!
//! * `theta[m][r]`: integral over `[0, s_m]` of the Lagrange basis
//!   polynomial attached to node `r`,
//! * `beta[m] = s_m`: the forward-Euler weight of the low-order operator.
//!
//! Weights are computed in exact rational arithmetic and rounded once, so
//! they are correct to the last bit. Callers scale them by `dt`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const MAX_SUBINTERVALS: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub struct DecTables {
    subintervals: usize,
    nodes: Vec<f64>,
    theta: Vec<Vec<f64>>,
    beta: Vec<f64>,
}

impl DecTables {
    /// Tables for `subintervals` equispaced subintervals (`1..=15`).
    pub fn build(subintervals: usize) -> Result<Self> {
        if !(1..=MAX_SUBINTERVALS).contains(&subintervals) {
            return Err(Error::UnsupportedSubintervals(subintervals));
        }
        let m_total = subintervals;
        let nodes: Vec<f64> = (0..=m_total).map(|m| m as f64 / m_total as f64).collect();
        let theta = exact_theta(m_total)
            .into_iter()
            .map(|row| {
                row.iter()
                    .map(|w| w.to_f64().expect("finite rational weight"))
                    .collect()
            })
            .collect();
        let beta = nodes.clone();
        Ok(Self {
            subintervals,
            nodes,
            theta,
            beta,
        })
    }

    /// Number of subintervals `M`.
    pub fn subintervals(&self) -> usize {
        self.subintervals
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `theta[m][r]`.
    pub fn theta(&self) -> &[Vec<f64>] {
        &self.theta
    }

    pub fn theta_row(&self, m: usize) -> &[f64] {
        &self.theta[m]
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Debug dump: `m,node,beta,theta_0,...,theta_M`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,node,beta");
        for r in 0..=self.subintervals {
            write!(out, ",theta_{r}").unwrap();
        }
        out.push('\n');
        for m in 0..=self.subintervals {
            write!(out, "{m},{:.17e},{:.17e}", self.nodes[m], self.beta[m]).unwrap();
            for w in &self.theta[m] {
                write!(out, ",{w:.17e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Exact `theta[m][r]` on the unit interval.
///
/// In the integer variable `u = M s` the basis is
/// `prod_{j != r} (u - j) / prod_{j != r} (r - j)`, whose numerator has
/// integer coefficients; integrating it over `[0, m]` and dividing by `M`
/// gives the weight on the unit interval.
pub(crate) fn exact_theta(subintervals: usize) -> Vec<Vec<BigRational>> {
    let m_total = subintervals as i64;
    let mut theta = vec![vec![BigRational::zero(); subintervals + 1]; subintervals + 1];
    for r in 0..=m_total {
        // coefficients of prod_{j != r} (u - j), lowest degree first
        let mut coeffs = vec![BigInt::from(1)];
        let mut denom = BigInt::from(1);
        for j in (0..=m_total).filter(|&j| j != r) {
            let mut next = vec![BigInt::zero(); coeffs.len() + 1];
            for (k, a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * j;
            }
            coeffs = next;
            denom *= r - j;
        }
        for m in 1..=m_total {
            let upper = BigInt::from(m);
            let mut power = upper.clone();
            let mut integral = BigRational::zero();
            for (k, a) in coeffs.iter().enumerate() {
                integral += BigRational::new(a * &power, BigInt::from(k as i64 + 1));
                power *= &upper;
            }
            theta[m as usize][r as usize] = integral / BigRational::from_integer(&denom * m_total);
        }
    }
    theta
}

/// Value of the `r`-th Lagrange basis polynomial on `nodes` at `s`.
/// Nodes must be distinct.
pub fn lagrange_basis_value(nodes: &[f64], r: usize, s: f64) -> f64 {
    let xr = nodes[r];
    nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != r)
        .map(|(_, &xj)| (s - xj) / (xr - xj))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn one_subinterval_is_trapezoidal() {
        let t = DecTables::build(1).unwrap();
        assert_eq!(t.theta(), &[vec![0.0, 0.0], vec![0.5, 0.5]]);
        assert_eq!(t.beta(), &[0.0, 1.0]);
    }

    #[test]
    fn two_subintervals_exact_rationals() {
        let exact = exact_theta(2);
        assert_eq!(exact[1], vec![q(5, 24), q(8, 24), q(-1, 24)]);
        assert_eq!(exact[2], vec![q(1, 6), q(4, 6), q(1, 6)]);
    }

    #[test]
    fn first_row_is_zero() {
        for m in 1..=MAX_SUBINTERVALS {
            let t = DecTables::build(m).unwrap();
            assert!(t.theta_row(0).iter().all(|&w| w == 0.0));
            assert_eq!(t.beta()[0], 0.0);
            assert_eq!(t.beta()[m], 1.0);
        }
    }

    #[test]
    fn out_of_range_is_rejected() {
        assert_eq!(DecTables::build(0), Err(Error::UnsupportedSubintervals(0)));
        assert_eq!(DecTables::build(16), Err(Error::UnsupportedSubintervals(16)));
    }

    #[test]
    fn exact_rows_sum_to_node() {
        for m_total in 1..=MAX_SUBINTERVALS {
            let exact = exact_theta(m_total);
            for (m, row) in exact.iter().enumerate() {
                let sum: BigRational = row.iter().cloned().sum();
                assert_eq!(sum, q(m as i64, m_total as i64));
            }
        }
    }

    #[test]
    fn basis_interpolates_and_sums_to_one() {
        let nodes: Vec<f64> = (0..=4).map(|m| m as f64 / 4.0).collect();
        for r in 0..=4 {
            for (m, &x) in nodes.iter().enumerate() {
                let v = lagrange_basis_value(&nodes, r, x);
                assert_eq!(v, if r == m { 1.0 } else { 0.0 });
            }
        }
        let total: f64 = (0..=4).map(|r| lagrange_basis_value(&nodes, r, 0.3)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_basis_closed_form() {
        assert_eq!(lagrange_basis_value(&[0.0, 1.0], 1, 0.25), 0.25);
        assert_eq!(lagrange_basis_value(&[0.0, 1.0], 0, 0.25), 0.75);
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let csv = DecTables::build(2).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "m,node,beta,theta_0,theta_1,theta_2");
        assert_eq!(lines.len(), 4);
    }
}
