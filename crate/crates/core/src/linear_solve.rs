//! Small dense linear algebra for the per-subtimestep mass-matrix solves.
//!
//! The systems are tiny (two or three constituents for the benchmark
//! problems), so a row-major `Vec<f64>` with Gaussian elimination is all
//! that is needed. The Jacobi inverse iteration is kept here only to witness
//! inverse positivity in tests.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Square matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from rows. All rows must have the same length as the
    /// number of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_mat(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.dim).map(|i| self.row(i)).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// Solves `a * x = b` by Gaussian elimination with partial pivoting.
///
/// For strictly column diagonally dominant matrices the diagonal is always
/// the largest entry of its column, so no rows are ever exchanged and the
/// elimination keeps the M-matrix sign pattern.
pub fn solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    solve_with_tolerance(a, b, 0.0)
}

/// Like [`solve`], but treats a pivot as singular when its magnitude does
/// not exceed `pivot_tolerance * max|a|`.
pub fn solve_with_tolerance(a: &DenseMatrix, b: &[f64], pivot_tolerance: f64) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let threshold = pivot_tolerance * a.max_abs();
    let mut lu = a.clone();
    let mut x = b.to_vec();

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = lu[(col, col)].abs();
        for row in col + 1..n {
            let v = lu[(row, col)].abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = row;
            }
        }
        if !(pivot_abs > threshold) || !pivot_abs.is_finite() {
            return Err(Error::SingularMatrix { column: col });
        }
        if pivot_row != col {
            for j in 0..n {
                lu.data.swap(col * n + j, pivot_row * n + j);
            }
            x.swap(col, pivot_row);
        }
        let pivot = lu[(col, col)];
        for row in col + 1..n {
            let factor = lu[(row, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            lu[(row, col)] = 0.0;
            for j in col + 1..n {
                lu[(row, j)] -= factor * lu[(col, j)];
            }
            x[row] -= factor * x[col];
        }
    }

    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= lu[(i, j)] * x[j];
        }
        x[i] = acc / lu[(i, i)];
    }
    Ok(x)
}

/// Strict column diagonal dominance: `a_ii > sum_{j != i} |a_ji|` for
/// every column `i`.
pub fn is_column_diagonally_dominant(a: &DenseMatrix) -> bool {
    first_non_dominant_column(a).is_none()
}

fn first_non_dominant_column(a: &DenseMatrix) -> Option<usize> {
    let n = a.dim();
    (0..n).find(|&i| {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(j, i)].abs()).sum();
        !(a[(i, i)] > off)
    })
}

/// Jacobi iteration towards `a^{-1}`:
/// `Z_{s+1} = (I - D^{-1} a) Z_s + D^{-1}`, starting from `Z_0 = I`.
///
/// Requires a strictly column diagonally dominant matrix with positive
/// diagonal and nonpositive off-diagonal entries, in which case every
/// iterate is entrywise nonnegative.
pub fn jacobi_inverse_iteration(a: &DenseMatrix, iterations: usize) -> Result<DenseMatrix> {
    let n = a.dim();
    if let Some(column) = first_non_dominant_column(a) {
        return Err(Error::NotDiagonallyDominant { column });
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] > 0.0 {
                return Err(Error::NotDiagonallyDominant { column: j });
            }
        }
    }

    let mut iteration = DenseMatrix::zeros(n);
    for i in 0..n {
        let inv_diag = 1.0 / a[(i, i)];
        for j in 0..n {
            iteration[(i, j)] = if i == j { 0.0 } else { -a[(i, j)] * inv_diag };
        }
    }

    let mut z = DenseMatrix::identity(n);
    for _ in 0..iterations {
        let mut next = iteration.mul_mat(&z);
        for i in 0..n {
            next[(i, i)] += 1.0 / a[(i, i)];
        }
        z = next;
    }
    Ok(z)
}
