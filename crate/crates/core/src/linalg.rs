//! Small dense matrices, LU with partial pivoting, and a Levinson solver for
//! symmetric positive definite Toeplitz systems.
//!
//! The closed-form solvers only ever need `n x n` systems where `n` is the
//! number of exponential terms, so nothing here is blocked or vectorized.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matrix/vector dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| s * self[(i, j)])
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| left[i] * self[(i, j)] * right[j])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)]).sum()).collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// LU factorization `P A = L U` with partial (row) pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors a square matrix. A pivot below `1e-300` or a non-finite entry
    /// is reported as an infinite condition number.
    pub fn new(a: &Matrix) -> Result<Lu> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > 1e-300) || !pivot.is_finite() {
                return Err(Error::IllConditioned { condition: f64::INFINITY });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / d;
                lu[(i, k)] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= factor * u;
                    }
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.lu.rows;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }

    pub fn determinant(&self) -> f64 {
        let n = self.lu.rows;
        let mut swaps = 0;
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            swaps += len - 1;
        }
        let prod: f64 = (0..n).map(|i| self.lu[(i, i)]).product();
        if swaps % 2 == 0 {
            prod
        } else {
            -prod
        }
    }
}

/// Solves `A x = b` and returns `x` with the 1-norm condition estimate
/// `||A||_1 ||A^{-1}||_1` computed from the explicit inverse.
pub fn solve_with_condition(a: &Matrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let lu = Lu::new(a)?;
    let condition = a.norm_one() * lu.inverse().norm_one();
    Ok((lu.solve(b), condition))
}

/// Symmetric Toeplitz matrix given by its first row.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricToeplitz<'a> {
    row: &'a [f64],
}

impl<'a> SymmetricToeplitz<'a> {
    pub fn new(row: &'a [f64]) -> Self {
        SymmetricToeplitz { row }
    }

    pub fn len(&self) -> usize {
        self.row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.row[i.abs_diff(j)]
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.len();
        Matrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                // Split the row into the reversed left part and the right part
                // so each product is a contiguous dot product.
                let left: f64 = (0..i).map(|j| self.row[i - j] * x[j]).sum();
                left + dot(&self.row[..n - i], &x[i..])
            })
            .collect()
    }

    /// Solves `T x = b` by the Levinson recursion.
    ///
    /// The prediction errors of the recursion are the pivots of the `LDL^T`
    /// factorization of `T`; any pivot at or below `rel_pivot_tol * max|row|`
    /// means the matrix is not (numerically) positive definite and is
    /// reported with its index.
    pub fn solve_spd(&self, b: &[f64], rel_pivot_tol: f64) -> Result<Vec<f64>> {
        let n = self.len();
        assert_eq!(b.len(), n);
        if n == 0 {
            return Ok(Vec::new());
        }
        let scale = self.row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let r0 = self.row[0];
        if !(r0 > rel_pivot_tol * scale) {
            return Err(Error::NotPositiveType { index: 0, pivot: r0 });
        }
        let r: Vec<f64> = self.row[1..].iter().map(|v| v / r0).collect();
        let b: Vec<f64> = b.iter().map(|v| v / r0).collect();
        let threshold = rel_pivot_tol * scale / r0;

        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        x[0] = b[0];
        if n == 1 {
            return Ok(x);
        }
        y[0] = -r[0];
        let mut beta = 1.0;
        let mut alpha = -r[0];
        for k in 1..n {
            beta *= 1.0 - alpha * alpha;
            if !(beta > threshold) {
                return Err(Error::NotPositiveType { index: k, pivot: beta * r0 });
            }
            let proj: f64 = (0..k).map(|i| r[i] * x[k - 1 - i]).sum();
            let mu = (b[k] - proj) / beta;
            for i in 0..k {
                x[i] += mu * y[k - 1 - i];
            }
            x[k] = mu;
            if k < n - 1 {
                let proj: f64 = (0..k).map(|i| r[i] * y[k - 1 - i]).sum();
                alpha = (-r[k] - proj) / beta;
                for i in 0..k {
                    scratch[i] = y[i] + alpha * y[k - 1 - i];
                }
                y[..k].copy_from_slice(&scratch[..k]);
                y[k] = alpha;
            }
        }
        Ok(x)
    }
}
