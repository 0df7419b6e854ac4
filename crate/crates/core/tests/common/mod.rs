//! Independent reference implementations and random system generators shared
//! by the integration tests.

#![allow(dead_code)]

use mpdec_core::pds::{ProductionDestructionSystem, StateVector};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::Rng;

/// Conservative system with random coefficients. Rates mix linear and
/// saturating terms: `p_ij = a_ij c_j + b_ij c_i c_j / (1 + c_i)`.
pub fn random_system(rng: &mut StdRng, dim: usize) -> ProductionDestructionSystem {
    let mut a = vec![vec![0.0; dim]; dim];
    let mut b = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            if i != j && rng.gen_bool(0.7) {
                a[i][j] = rng.gen_range(0.0..5.0);
                b[i][j] = rng.gen_range(0.0..2.0);
            }
        }
    }
    ProductionDestructionSystem::from_production("random", dim, move |c, p| {
        for i in 0..c.len() {
            for j in 0..c.len() {
                if i != j {
                    p[(i, j)] = a[i][j] * c[j] + b[i][j] * c[i] * c[j] / (1.0 + c[i]);
                }
            }
        }
    })
}

/// Positive state with entries spread over several decades.
pub fn random_state(rng: &mut StdRng, dim: usize) -> StateVector {
    StateVector::new((0..dim).map(|_| 10f64.powf(rng.gen_range(-4.0..1.0))).collect())
}

pub fn random_dt(rng: &mut StdRng) -> f64 {
    10f64.powf(rng.gen_range(-3.0..1.0))
}

fn rate_matrices(system: &ProductionDestructionSystem, c: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let t = system.evaluate_rates(c).unwrap();
    let n = c.len();
    (
        DMatrix::from_fn(n, n, |i, j| t.production[(i, j)]),
        DMatrix::from_fn(n, n, |i, j| t.destruction[(i, j)]),
    )
}

fn exchange(system: &ProductionDestructionSystem, c: &[f64]) -> DVector<f64> {
    let (p, d) = rate_matrices(system, c);
    DVector::from_fn(c.len(), |i, _| p.row(i).sum() - d.row(i).sum())
}

/// Solves `c_new = c + dt sum_j (p_ij c_new_j / w_j - d_ij c_new_i / w_i)`
/// for given (averaged) rate matrices and Patankar weights `w`.
fn patankar_solve(c: &[f64], p: &DMatrix<f64>, d: &DMatrix<f64>, w: &[f64], dt: f64) -> Vec<f64> {
    let n = c.len();
    let mut a = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] -= dt * p[(i, j)] / w[j];
            a[(i, i)] += dt * d[(i, j)] / w[i];
        }
    }
    let rhs = DVector::from_column_slice(c);
    a.lu().solve(&rhs).expect("Patankar matrix is invertible").iter().copied().collect()
}

pub fn modified_patankar_euler(system: &ProductionDestructionSystem, c: &[f64], dt: f64) -> Vec<f64> {
    let (p, d) = rate_matrices(system, c);
    patankar_solve(c, &p, &d, c, dt)
}

/// Second-order modified Patankar Runge–Kutta with a full Euler predictor.
pub fn modified_patankar_rk22(system: &ProductionDestructionSystem, c: &[f64], dt: f64) -> Vec<f64> {
    let stage = modified_patankar_euler(system, c, dt);
    let (p0, d0) = rate_matrices(system, c);
    let (p1, d1) = rate_matrices(system, &stage);
    patankar_solve(c, &((p0 + p1) * 0.5), &((d0 + d1) * 0.5), &stage, dt)
}

pub fn heun(system: &ProductionDestructionSystem, c: &[f64], dt: f64) -> Vec<f64> {
    let c0 = DVector::from_column_slice(c);
    let k1 = exchange(system, c);
    let stage = &c0 + &k1 * dt;
    let k2 = exchange(system, stage.as_slice());
    (c0 + (k1 + k2) * (dt / 2.0)).iter().copied().collect()
}

/// Largest componentwise difference relative to the size of `reference`.
pub fn relative_difference(actual: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let diff = actual
        .iter()
        .zip(reference)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    diff / scale
}

/// `int_0^{s_m} l_r(s) ds` by 8-point Gauss–Legendre quadrature, exact for
/// the polynomial degrees used here (M <= 15).
pub fn gauss_legendre_theta(subintervals: usize, m: usize, r: usize) -> f64 {
    const X: [f64; 8] = [
        -0.9602898564975363,
        -0.7966664774136267,
        -0.5255324099163290,
        -0.1834346424956498,
        0.1834346424956498,
        0.5255324099163290,
        0.7966664774136267,
        0.9602898564975363,
    ];
    const W: [f64; 8] = [
        0.1012285362903763,
        0.2223810344533745,
        0.3137066458778873,
        0.3626837833783620,
        0.3626837833783620,
        0.3137066458778873,
        0.2223810344533745,
        0.1012285362903763,
    ];
    let nodes: Vec<f64> = (0..=subintervals).map(|k| k as f64 / subintervals as f64).collect();
    let basis = |s: f64| {
        (0..=subintervals)
            .filter(|&k| k != r)
            .fold(1.0, |acc, k| acc * (s - nodes[k]) / (nodes[r] - nodes[k]))
    };
    let end = nodes[m];
    let half = end / 2.0;
    X.iter().zip(W).map(|(x, w)| w * half * basis(half * (x + 1.0))).sum()
}
