//! Closed forms for the capped linear kernel `(1 - t)^+` on `[0, n]` and the
//! cosine kernel `cos(ρt)`.
//!
//! Both serve as counterexamples: the first solution is positive but not
//! convex, the second takes negative values.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::math;
use crate::quadrature::GaussLegendre;

/// Solution for `G(t) = (1 - t)^+` with `T = n`, written segment by segment:
/// `φ(t + i - 1) = φ_i(t)` for `t ∈ [0, 1]` and
///
/// ```text
/// (φ_1(t), …, φ_n(t))ᵀ = Q (E(t) + E(1 - t) J) a
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct CappedLinearSolution {
    n: usize,
    gamma: f64,
    sigma: f64,
    q: Matrix,
    lambda: Vec<f64>,
    b: Vec<f64>,
    // a_j e^{b_j}; bounded even when e^{b_j} is not representable
    a_scaled: Vec<f64>,
}

fn sign(j: usize) -> f64 {
    // (-1)^{j+1} for 1-based j
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Solves the capped linear example on `[0, n]` and normalises to unit mass.
///
/// The coefficient system is assembled for `ã = E(1) a` instead of `a`, which
/// is the same system with every `e^{b_j}` replaced by `1` or `e^{-b_j}`.
pub fn capped_linear_solve(n: usize, gamma: f64) -> Result<CappedLinearSolution> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("gamma must be positive, got {gamma}")));
    }
    let angle = PI / (n + 1) as f64;
    let lambda: Vec<f64> = (1..=n).map(|i| 2.0 * (1.0 - math::cos(i as f64 * angle))).collect();
    let b: Vec<f64> = lambda.iter().map(|l| math::sqrt(l / gamma)).collect();
    let q = Matrix::from_fn(n, n, |i, j| math::sin(((i + 1) * (j + 1)) as f64 * angle));
    let k = Matrix::from_fn(n, n, |i, j| {
        // I plus ones at 1-based (i, n - i)
        let diagonal = if i == j { 1.0 } else { 0.0 };
        let anti = if i + 2 <= n && j == n - 2 - i { 1.0 } else { 0.0 };
        diagonal + anti
    });
    let decay: Vec<f64> = b.iter().map(|v| math::exp(-v)).collect();

    // γ Q (I + J e^{-B}) + K Q ((I - e^{-B})(J - I) + B(I - J e^{-B})) B^{-2}
    let first = Matrix::from_fn(n, n, |i, j| gamma * q[(i, j)] * (1.0 + sign(j) * decay[j]));
    let inner: Vec<f64> = (0..n)
        .map(|j| {
            ((1.0 - decay[j]) * (sign(j) - 1.0) + b[j] * (1.0 - sign(j) * decay[j])) / (b[j] * b[j])
        })
        .collect();
    let second = k.mul(&q.scale_rows_cols(&vec![1.0; n], &inner));
    let system = first.add(&second);
    let raw = Lu::new(&system)?.solve(&vec![1.0; n]);

    // ∫_0^1 e^{b(s-1)} ds = ∫_0^1 e^{-bs} ds = (1 - e^{-b})/b
    let column_mass: Vec<f64> = (0..n).map(|j| math::one_minus_exp_ratio(b[j]) * (1.0 + sign(j))).collect();
    let mass: f64 = (0..n)
        .map(|i| (0..n).map(|j| q[(i, j)] * column_mass[j] * raw[j]).sum::<f64>())
        .sum();
    if !(mass > 0.0) {
        return Err(Error::IllConditioned { condition: f64::INFINITY });
    }
    let a_scaled = raw.iter().map(|v| v / mass).collect();
    Ok(CappedLinearSolution { n, gamma, sigma: 1.0 / mass, q, lambda, b, a_scaled })
}

impl CappedLinearSolution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.n as f64
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `λ_i = 2(1 - cos(iπ/(n+1)))`, the eigenvalues of `tridiag(-1, 2, -1)`.
    pub fn lambda_vec(&self) -> &[f64] {
        &self.lambda
    }

    /// `b_i = √(λ_i/γ)`.
    pub fn b_vec(&self) -> &[f64] {
        &self.b
    }

    /// `Q_ij = sin(ijπ/(n+1))`.
    pub fn q(&self) -> &Matrix {
        &self.q
    }

    /// The vector `a` of the segment formula. Entries underflow once `b_j`
    /// exceeds about 745.
    pub fn a_vec(&self) -> Vec<f64> {
        self.a_scaled.iter().zip(&self.b).map(|(a, b)| a * math::exp(-b)).collect()
    }

    /// `(φ_1(s), …, φ_n(s))` for `s ∈ [0, 1]`.
    pub fn segment_values(&self, s: f64) -> Vec<f64> {
        let n = self.n;
        let basis: Vec<f64> = (0..n)
            .map(|j| {
                let b = self.b[j];
                (math::exp(b * (s - 1.0)) + sign(j) * math::exp(-b * s)) * self.a_scaled[j]
            })
            .collect();
        self.q.mul_vec(&basis)
    }

    /// `φ(t)` for `t ∈ [0, n]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(Error::Domain { what: "time", value: t });
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        let seg = (math::floor(t) as usize).min(self.n - 1);
        let s = t - seg as f64;
        let row = self.q.row(seg);
        (0..self.n)
            .map(|j| {
                let b = self.b[j];
                row[j] * (math::exp(b * (s - 1.0)) + sign(j) * math::exp(-b * s)) * self.a_scaled[j]
            })
            .sum()
    }

    /// `∫_0^n (1 - |t - s|)^+ φ(s) ds` by Gauss-Legendre quadrature on the
    /// pieces where both factors are smooth.
    pub fn convolution(&self, t: f64) -> f64 {
        let big_t = self.horizon();
        let lo = (t - 1.0).max(0.0);
        let hi = (t + 1.0).min(big_t);
        let mut breaks = vec![lo, t, hi];
        let first = math::floor(lo) as usize + 1;
        for k in first..self.n {
            let x = k as f64;
            if x > lo && x < hi {
                breaks.push(x);
            }
        }
        breaks.sort_by(|a, b| a.total_cmp(b));
        let rule = GaussLegendre::new(20);
        rule.integrate_piecewise(&breaks, 8, |s| (1.0 - (t - s).abs()).max(0.0) * self.eval_unchecked(s))
    }

    /// `γφ(t) + ∫G(|t-s|)φ(s)ds - σ`.
    pub fn residual(&self, t: f64) -> f64 {
        self.gamma * self.eval_unchecked(t) + self.convolution(t) - self.sigma
    }

    /// `J[φ] = ½∫φ(γφ + Gφ)`.
    pub fn energy(&self) -> f64 {
        let rule = GaussLegendre::new(20);
        let breaks: Vec<f64> = (0..=self.n).map(|k| k as f64).collect();
        0.5 * rule.integrate_piecewise(&breaks, 8, |t| {
            let phi = self.eval_unchecked(t);
            phi * (self.gamma * phi + self.convolution(t))
        })
    }
}

/// Solution for `G(t) = cos(ρt)`:
///
/// ```text
/// φ(t) = (σ/γ)(1 - κ (cos ρt + cos ρ(T - t))),  κ = 2 tan(ρT/2) / (ρ(2γ + T) + sin ρT)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigSolution {
    rho: f64,
    gamma: f64,
    horizon: f64,
    sigma: f64,
    kappa: f64,
}

/// Relative distance from a pole of `tan(ρT/2)` below which no solution is
/// returned.
pub const POLE_GUARD: f64 = 1e-8;

pub fn trig_solve(rho: f64, gamma: f64, horizon: f64) -> Result<TrigSolution> {
    for (name, v) in [("rho", rho), ("gamma", gamma), ("horizon", horizon)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("{name} must be positive, got {v}")));
        }
    }
    let half = 0.5 * rho * horizon;
    let k = math::round(half / PI - 0.5);
    if (half - (k + 0.5) * PI).abs() < POLE_GUARD * half.max(1.0) {
        return Err(Error::TrigPole { half_angle: half });
    }
    let kappa = 2.0 * math::tan(half) / (rho * (2.0 * gamma + horizon) + math::sin(rho * horizon));
    // ∫(cos ρt + cos ρ(T-t)) dt = 2 sin(ρT)/ρ
    let mass = (horizon - kappa * 2.0 * math::sin(rho * horizon) / rho) / gamma;
    if !(mass > 0.0) {
        return Err(Error::TrigPole { half_angle: half });
    }
    Ok(TrigSolution { rho, gamma, horizon, sigma: 1.0 / mass, kappa })
}

impl TrigSolution {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain { what: "time", value: t });
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        let r = self.rho;
        self.sigma / self.gamma * (1.0 - self.kappa * (math::cos(r * t) + math::cos(r * (self.horizon - t))))
    }

    /// `∫_0^T cos(ρ(t - s)) φ(s) ds`, exact.
    pub fn convolution(&self, t: f64) -> f64 {
        let (r, big_t) = (self.rho, self.horizon);
        let flat = (math::sin(r * t) + math::sin(r * (big_t - t))) / r;
        // ∫_0^T cos(ρ(t - s)) cos(ρs) ds
        let against_cos = |x: f64| 0.5 * big_t * math::cos(r * x) + (math::sin(r * x) - math::sin(r * (x - 2.0 * big_t))) / (4.0 * r);
        self.sigma / self.gamma * (flat - self.kappa * (against_cos(t) + against_cos(big_t - t)))
    }

    pub fn residual(&self, t: f64) -> f64 {
        self.gamma * self.eval_unchecked(t) + self.convolution(t) - self.sigma
    }

    /// `J[φ] = ½∫φ(γφ + Gφ)`.
    pub fn energy(&self) -> f64 {
        let rule = GaussLegendre::new(20);
        let pieces = 8 + (self.rho * self.horizon) as usize;
        0.5 * rule.integrate_composite(0.0, self.horizon, pieces, |t| {
            let phi = self.eval_unchecked(t);
            phi * (self.gamma * phi + self.convolution(t))
        })
    }
}
