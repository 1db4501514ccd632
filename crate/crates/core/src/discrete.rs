//! Piecewise-constant discretization of the energy on a uniform grid.
//!
//! With `m` cells of width `h = T/m` and `φ = Σ φ_k 1[t_k, t_{k+1})`, the energy
//! is the quadratic form `φᵀHφ` where
//!
//! ```text
//! H_ij = (γh/2) δ_ij + (1/2) ∫_{cell i} ∫_{cell j} G(|t - s|) ds dt
//! ```
//!
//! `H` is symmetric Toeplitz, so it is stored as its first row. Minimising
//! under `h Σ φ_k = 1` gives `φ ∝ H⁻¹1` with multiplier `σ = 2 / (wᵀH⁻¹w)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{dot, Matrix, SymmetricToeplitz};

/// Pivots below this fraction of `max|H|` are treated as a loss of
/// definiteness.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// One minimisation instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    gamma: f64,
    horizon: f64,
    kernel: Kernel,
}

impl Problem {
    pub fn new(gamma: f64, horizon: f64, kernel: Kernel) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Problem { gamma, horizon, kernel })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Same kernel and horizon, different `γ`.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Problem::new(gamma, self.horizon, self.kernel.clone())
    }
}

/// Lag values of the discretized kernel: `H_ii = gn0` and
/// `H_ij = gn[|i - j| - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernelRow {
    pub gn0: f64,
    pub gn: Vec<f64>,
}

/// The quadratic form `φᵀHφ` together with the constraint weight `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    row: Vec<f64>,
    step: f64,
}

impl QuadraticForm {
    pub fn cells(&self) -> usize {
        self.row.len()
    }

    /// Constraint weight of every cell, `w_k = T/m`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn weights(&self) -> Vec<f64> {
        alloc::vec![self.step; self.row.len()]
    }

    /// First row of the Toeplitz matrix `H`.
    pub fn first_row(&self) -> &[f64] {
        &self.row
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.row[i.abs_diff(j)]
    }

    pub fn matrix(&self) -> Matrix {
        SymmetricToeplitz::new(&self.row).to_dense()
    }

    pub fn kernel_row(&self) -> DiscreteKernelRow {
        DiscreteKernelRow { gn0: self.row[0], gn: self.row[1..].to_vec() }
    }

    /// `φᵀHφ`.
    pub fn energy(&self, phi: &[f64]) -> f64 {
        dot(phi, &SymmetricToeplitz::new(&self.row).mul_vec(phi))
    }
}

/// Piecewise-constant minimiser on `m` uniform cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    pub horizon: f64,
    pub gamma: f64,
    pub values: Vec<f64>,
    pub sigma: f64,
    pub energy: f64,
    pub residual_max: f64,
}

impl SolutionGrid {
    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.values.len() as f64
    }

    pub fn midpoints(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.values.len()).map(|k| (k as f64 + 0.5) * h).collect()
    }

    /// `∫φ`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step()
    }

    /// Value of the cell containing `t`; the right endpoint belongs to the
    /// last cell.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain { what: "time", value: t });
        }
        let k = ((t / self.step()) as usize).min(self.values.len() - 1);
        Ok(self.values[k])
    }

    /// `max_k |φ_k - φ_{m-1-k}|`.
    pub fn symmetry_error(&self) -> f64 {
        let v = &self.values;
        let m = v.len();
        (0..m).map(|k| (v[k] - v[m - 1 - k]).abs()).fold(0.0, f64::max)
    }
}

/// Assembles `H` on `m` cells.
pub fn discretize(problem: &Problem, m: usize) -> Result<QuadraticForm> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 cells, got {m}")));
    }
    let h = problem.horizon / m as f64;
    let kernel = &problem.kernel;
    let row = (0..m)
        .map(|k| {
            let lo = k as f64 * h;
            let interaction = 0.5 * kernel.cell_double_integral(0.0, h, lo, lo + h);
            if k == 0 {
                0.5 * problem.gamma * h + interaction
            } else {
                interaction
            }
        })
        .collect();
    Ok(QuadraticForm { row, step: h })
}

/// Minimises the discretized energy under `∫φ = 1`.
///
/// # Errors
///
/// [`Error::NotPositiveType`] when the factorization of `H` meets a pivot at
/// or below `PIVOT_TOLERANCE * max|H|`.
pub fn solve(problem: &Problem, m: usize) -> Result<SolutionGrid> {
    let form = discretize(problem, m)?;
    let toeplitz = SymmetricToeplitz::new(&form.row);
    let w = form.weights();
    let x = toeplitz.solve_spd(&w, PIVOT_TOLERANCE)?;
    let wx = dot(&w, &x);
    if !(wx > 0.0) {
        return Err(Error::NotPositiveType { index: m - 1, pivot: wx });
    }
    let values: Vec<f64> = x.iter().map(|v| v / wx).collect();
    let sigma = 2.0 / wx;
    let energy = form.energy(&values);
    let residual_max = midpoint_residual(problem, &values, sigma);
    Ok(SolutionGrid { horizon: problem.horizon, gamma: problem.gamma, values, sigma, energy, residual_max })
}

/// `max_i |γφ_i + Σ_j φ_j ∫_{cell j} G(|t_i - s|) ds - σ|` over the cell
/// midpoints `t_i`, with every single-cell integral exact.
pub fn midpoint_residual(problem: &Problem, values: &[f64], sigma: f64) -> f64 {
    let m = values.len();
    let h = problem.horizon / m as f64;
    // ∫_{cell j} G(|t_i - s|) ds depends only on |i - j|.
    let lags: Vec<f64> = (0..m)
        .map(|d| problem.kernel.cell_integral((d as f64 + 0.5) * h, 0.0, h))
        .collect();
    let conv = SymmetricToeplitz::new(&lags).mul_vec(values);
    values
        .iter()
        .zip(&conv)
        .map(|(phi, c)| (problem.gamma * phi + c - sigma).abs())
        .fold(0.0, f64::max)
}

/// Solves the same instance for each `γ` in a strictly decreasing list.
pub fn gamma_sweep(problem: &Problem, m: usize, gammas: &[f64]) -> Result<Vec<SolutionGrid>> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("gamma list is empty".into()));
    }
    if gammas.windows(2).any(|g| !(g[1] < g[0])) {
        return Err(Error::InvalidParameter("gammas must be strictly decreasing".into()));
    }
    gammas.iter().map(|&g| solve(&problem.with_gamma(g)?, m)).collect()
}
