//! Closed-form minimiser for exponential-sum kernels.
//!
//! For `G(t) = Σ a_k e^{-√b_k t}` the minimiser is
//!
//! ```text
//! φ(t) = d (1 + Σ z_i (e^{√c_i t} + e^{√c_i (T - t)}))
//! ```
//!
//! where `c` are the eigenvalues of `M = B + 2λ A B^{1/2} 11ᵀ` (`λ = 1/γ`),
//! found as roots of the secular function, and `z ≥ 0` comes from a small
//! Cauchy-structured linear system. Everything is built at `σ = γ` first and
//! then rescaled to unit mass.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::ExponentialSum;
use crate::linalg::{solve_with_condition, Lu, Matrix};
use crate::math;
use crate::quadrature::GaussLegendre;

/// Systems with a larger 1-norm condition estimate are rejected.
pub const MAX_CONDITION: f64 = 1e14;

/// Coefficients below this are rounding noise and are set to zero; anything
/// more negative is an error.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Eigenvalues of `M`, ascending and interlaced with `b`:
/// `b_1 < c_1 < b_2 < c_2 < … < b_n < c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularSpectrum {
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub lambda: f64,
}

impl SecularSpectrum {
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// True when `b_i < c_i < b_{i+1}` for every `i`.
    pub fn interlaces(&self) -> bool {
        let n = self.c.len();
        (0..n).all(|i| self.c[i] > self.b[i] && (i + 1 == n || self.c[i] < self.b[i + 1]))
    }
}

fn secular(a: &[f64], b: &[f64], lambda: f64, x: f64) -> (f64, f64) {
    let mut f = 1.0;
    let mut df = 0.0;
    for (ak, bk) in a.iter().zip(b) {
        let w = 2.0 * lambda * ak * math::sqrt(*bk);
        let r = 1.0 / (x - bk);
        f -= w * r;
        df += w * r * r;
    }
    (f, df)
}

/// Roots of `f(x) = 1 - 2λ Σ a_k √b_k / (x - b_k)`.
///
/// `f` increases from `-∞` to `+∞` between consecutive poles, so each
/// bracket `(b_k, b_{k+1})` and `(b_n, b_n + 2λ Σ a_k √b_k]` holds exactly
/// one root. Sixty bisection steps are followed by a Newton polish that is
/// never allowed to leave the bracket.
pub fn secular_roots(a: &[f64], b: &[f64], lambda: f64) -> Result<SecularSpectrum> {
    let kernel = ExponentialSum::new(a.to_vec(), b.to_vec())?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("lambda must be positive, got {lambda}")));
    }
    let (a, b) = (kernel.a(), kernel.b());
    let n = a.len();
    let spread: f64 = a.iter().zip(b).map(|(ak, bk)| 2.0 * lambda * ak * math::sqrt(*bk)).sum();
    let mut c = Vec::with_capacity(n);
    for k in 0..n {
        let mut lo = b[k];
        let mut hi = if k + 1 < n { b[k + 1] } else { b[n - 1] + spread };
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if secular(a, b, lambda, mid).0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..8 {
            let (f, df) = secular(a, b, lambda, x);
            if f == 0.0 || df == 0.0 {
                break;
            }
            let next = x - f / df;
            if !(next > b[k]) || (k + 1 < n && !(next < b[k + 1])) {
                break;
            }
            let done = (next - x).abs() <= 1e-15 * x.abs();
            x = next;
            if done {
                break;
            }
        }
        c.push(x);
    }
    Ok(SecularSpectrum { c, b: b.to_vec(), lambda })
}

/// `Q̃_ij = 1/(c_j - b_i)` with the diagonal scalings of its explicit inverse
/// `Q̃⁻¹ = D1 Q̃ᵀ D2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyFactors {
    pub q_tilde: Matrix,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl CauchyFactors {
    pub fn new(spectrum: &SecularSpectrum) -> Self {
        let (b, c) = (&spectrum.b, &spectrum.c);
        let n = c.len();
        let q_tilde = Matrix::from_fn(n, n, |i, j| 1.0 / (c[j] - b[i]));
        let d1 = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&l| l != i)
                    .fold(c[i] - b[i], |acc, l| acc * (c[i] - b[l]) / (c[i] - c[l]))
            })
            .collect();
        let d2 = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&l| l != i)
                    .fold(c[i] - b[i], |acc, l| acc * (b[i] - c[l]) / (b[i] - b[l]))
            })
            .collect();
        CauchyFactors { q_tilde, d1, d2 }
    }

    /// `D1 Q̃ᵀ D2`.
    pub fn explicit_inverse(&self) -> Matrix {
        self.q_tilde.transpose().scale_rows_cols(&self.d1, &self.d2)
    }
}

/// Closed-form minimiser, normalised to unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpClosedForm {
    kernel: ExponentialSum,
    gamma: f64,
    horizon: f64,
    spectrum: SecularSpectrum,
    rates: Vec<f64>,
    d: f64,
    weights: Vec<f64>,
    z: Vec<f64>,
    normalization: f64,
    condition: f64,
}

/// `Ñ = A⁻¹(Q C^{1/2} + B^{1/2} Q E(T))` with `E(T) = coth(√c T / 2)`.
fn n_tilde(b: &[f64], c: &[f64], horizon: f64) -> Matrix {
    let n = c.len();
    let coth: Vec<f64> = c.iter().map(|&cj| coth_half(math::sqrt(cj) * horizon)).collect();
    Matrix::from_fn(n, n, |i, j| {
        let sb = math::sqrt(b[i]);
        sb * (math::sqrt(c[j]) + sb * coth[j]) / (c[j] - b[i])
    })
}

// coth(x/2) = (1 + e^{-x}) / (1 - e^{-x})
fn coth_half(x: f64) -> f64 {
    let e = math::expm1(-x);
    (2.0 + e) / -e
}

/// Builds the closed form for `γ > 0` on `[0, T]`.
///
/// # Errors
///
/// * [`Error::IllConditioned`] when `Ñ` is numerically singular.
/// * [`Error::NegativeCoefficient`] when an entry of `Ñ⁻¹1` is below
///   `-NEGATIVE_CLAMP`.
pub fn build_closed_form(kernel: &ExponentialSum, gamma: f64, horizon: f64) -> Result<ExpClosedForm> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("gamma must be positive, got {gamma}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("horizon must be positive, got {horizon}")));
    }
    let lambda = 1.0 / gamma;
    let spectrum = secular_roots(kernel.a(), kernel.b(), lambda)?;
    let n = spectrum.len();
    let nt = n_tilde(kernel.b(), &spectrum.c, horizon);
    let (mut weights, condition) = solve_with_condition(&nt, &vec![1.0; n])?;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    for (i, w) in weights.iter_mut().enumerate() {
        if *w < -NEGATIVE_CLAMP {
            return Err(Error::NegativeCoefficient { index: i, value: *w });
        }
        if *w < 0.0 {
            *w = 0.0;
        }
    }
    let rates: Vec<f64> = spectrum.c.iter().map(|&c| math::sqrt(c)).collect();
    let d = 1.0 / (1.0 + 2.0 * lambda * kernel.a().iter().zip(kernel.b()).map(|(a, b)| a / math::sqrt(*b)).sum::<f64>());
    // E(t) = (e^{κt} + e^{κ(T-t)}) / (e^{κT} - 1) integrates to 2/κ.
    let mass = d * (horizon + weights.iter().zip(&rates).map(|(w, k)| 2.0 * w / k).sum::<f64>());
    let z = weights
        .iter()
        .zip(&rates)
        .map(|(w, k)| w * math::exp(-k * horizon) / -math::expm1(-k * horizon))
        .collect();
    Ok(ExpClosedForm {
        kernel: kernel.clone(),
        gamma,
        horizon,
        spectrum,
        rates,
        d,
        weights,
        z,
        normalization: 1.0 / mass,
        condition,
    })
}

impl ExpClosedForm {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn kernel(&self) -> &ExponentialSum {
        &self.kernel
    }

    pub fn spectrum(&self) -> &SecularSpectrum {
        &self.spectrum
    }

    /// Eigenvalues `c_i`.
    pub fn c(&self) -> &[f64] {
        &self.spectrum.c
    }

    /// `d = (1 + 2λ Σ a_k/√b_k)⁻¹`.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Coefficients of `e^{√c_i t} + e^{√c_i (T-t)}` before normalisation.
    /// They underflow to zero once `√c_i T` passes about 745; use
    /// [`weights`](Self::weights) for anything quantitative.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// `Ñ⁻¹1`, equal to `z_i (e^{√c_i T} - 1)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Factor turning the `σ = γ` solution into the unit-mass one.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// 1-norm condition estimate of `Ñ`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn sigma(&self) -> f64 {
        self.gamma * self.normalization
    }

    // (e^{κt} + e^{κ(T-t)}) / (e^{κT} - 1), without overflow
    fn basis(&self, i: usize, t: f64) -> f64 {
        let k = self.rates[i];
        let big_t = self.horizon;
        (math::exp(k * (t - big_t)) + math::exp(-k * t)) / -math::expm1(-k * big_t)
    }

    /// `φ(t)` for `t ∈ [0, T]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain { what: "time", value: t });
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        let s: f64 = self.weights.iter().enumerate().map(|(i, w)| w * self.basis(i, t)).sum();
        self.normalization * self.d * (1.0 + s)
    }

    /// `∫_0^T G(|t - s|) φ(s) ds`, integrated term by term in closed form.
    pub fn convolution(&self, t: f64) -> f64 {
        let big_t = self.horizon;
        let mut total = 0.0;
        for (a, b) in self.kernel.a().iter().zip(self.kernel.b()) {
            let beta = math::sqrt(*b);
            let flat = (-math::expm1(-beta * t) - math::expm1(-beta * (big_t - t))) / beta;
            let mut acc = flat;
            for (i, w) in self.weights.iter().enumerate() {
                let k = self.rates[i];
                let term = (shifted_exp_conv(beta, k, t, big_t) + shifted_exp_conv(beta, k, big_t - t, big_t))
                    / -math::expm1(-k * big_t);
                acc += w * term;
            }
            total += a * acc;
        }
        self.normalization * self.d * total
    }

    /// `γφ(t) + ∫G(|t-s|)φ(s)ds - σ`.
    pub fn residual(&self, t: f64) -> f64 {
        self.gamma * self.eval_unchecked(t) + self.convolution(t) - self.sigma()
    }

    /// `J[φ] = ½∫φ(γφ + Gφ)`, by composite Gauss-Legendre quadrature with
    /// cells fine enough to resolve the steepest boundary layer.
    pub fn energy(&self) -> f64 {
        let steepest = self.rates.iter().fold(0.0f64, |m, k| m.max(*k));
        let pieces = (8.0 + steepest * self.horizon).min(4096.0) as usize;
        let rule = GaussLegendre::new(20);
        0.5 * rule.integrate_composite(0.0, self.horizon, pieces, |t| {
            let phi = self.eval_unchecked(t);
            phi * (self.gamma * phi + self.convolution(t))
        })
    }
}

// ∫_0^T e^{-β|t-s|} e^{κ(s-T)} ds
fn shifted_exp_conv(beta: f64, kappa: f64, t: f64, big_t: f64) -> f64 {
    let left = math::exp(kappa * (t - big_t)) * (t * math::one_minus_exp_ratio((beta + kappa) * t));
    let l = big_t - t;
    let right = math::exp(-beta.min(kappa) * l) * l * math::one_minus_exp_ratio((beta - kappa).abs() * l);
    left + right
}

/// Outcome of the numerical certificates for the algebraic steps.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// `max|Q̃ (D1 Q̃ᵀ D2) - I|`.
    pub cauchy_identity_err: f64,
    /// `max|D1 Q̃ᵀ D2 - Q̃⁻¹|` with `Q̃⁻¹` from LU, relative to `max|Q̃⁻¹|`.
    pub cauchy_vs_lu_err: f64,
    /// `max|Q̃⁻¹1 - D1 1|`, relative to `max D1`.
    pub d1_row_sum_err: f64,
    pub d1_min: f64,
    pub d2_min: f64,
    /// `max_j |Σ_i Q_ij - γ/2|`.
    pub column_sum_err: f64,
    /// Largest off-diagonal entry of `Ñ2⁻¹`, relative to its largest entry.
    pub n2_inverse_max_offdiag: f64,
    /// Smallest diagonal entry of `(Ñ2 + Ñ3)⁻¹ Ñ2`.
    pub u_min_diagonal: f64,
    /// Smallest entry of `Ñ⁻¹1`.
    pub weights_min: f64,
    /// `max|Ñ⁻¹ - Ñ1 (Ñ2 + Ñ3)⁻¹ Ñ4|`, relative to `max|Ñ⁻¹|`.
    pub factorization_err: f64,
    /// `max|Q C Q⁻¹ - M|`, relative to `max|M|`.
    pub reconstruction_err: f64,
}

impl StepReport {
    pub const TOL_IDENTITY: f64 = 1e-10;
    pub const TOL_SIGN: f64 = 1e-10;
    pub const TOL_RECONSTRUCTION: f64 = 1e-9;

    pub fn cauchy_inverse_ok(&self) -> bool {
        self.cauchy_identity_err <= Self::TOL_IDENTITY
            && self.cauchy_vs_lu_err <= Self::TOL_IDENTITY
            && self.d1_row_sum_err <= Self::TOL_IDENTITY
            && self.d1_min > 0.0
            && self.d2_min > 0.0
    }

    pub fn column_sums_ok(&self) -> bool {
        self.column_sum_err <= Self::TOL_IDENTITY
    }

    pub fn z_matrix_ok(&self) -> bool {
        self.n2_inverse_max_offdiag <= Self::TOL_SIGN
    }

    pub fn nonnegativity_ok(&self) -> bool {
        self.u_min_diagonal >= -Self::TOL_SIGN
            && self.weights_min >= -Self::TOL_SIGN
            && self.factorization_err <= Self::TOL_IDENTITY
    }

    pub fn reconstruction_ok(&self) -> bool {
        self.reconstruction_err <= Self::TOL_RECONSTRUCTION
    }

    pub fn all_ok(&self) -> bool {
        self.cauchy_inverse_ok()
            && self.column_sums_ok()
            && self.z_matrix_ok()
            && self.nonnegativity_ok()
            && self.reconstruction_ok()
    }
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).max_abs()
}

/// Recomputes every intermediate matrix and measures how well the algebraic
/// identities hold. `E(T)` depends on the horizon, hence the extra argument.
/// Failures are recorded in the report, never returned as errors; only
/// invalid parameters or an exactly singular factorization are errors.
pub fn verify_step_identities(kernel: &ExponentialSum, gamma: f64, horizon: f64) -> Result<StepReport> {
    if !(gamma > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidParameter("gamma and horizon must be positive".into()));
    }
    let lambda = 1.0 / gamma;
    let spectrum = secular_roots(kernel.a(), kernel.b(), lambda)?;
    let (a, b, c) = (kernel.a(), kernel.b(), &spectrum.c);
    let n = c.len();
    let cauchy = CauchyFactors::new(&spectrum);
    let qt = &cauchy.q_tilde;
    let explicit = cauchy.explicit_inverse();
    let identity = Matrix::identity(n);

    let qt_lu = Lu::new(qt)?.inverse();
    let cauchy_identity_err = max_abs_diff(&qt.mul(&explicit), &identity);
    let cauchy_vs_lu_err = max_abs_diff(&explicit, &qt_lu) / qt_lu.max_abs();
    let row_sums = qt_lu.mul_vec(&vec![1.0; n]);
    let d1_max = cauchy.d1.iter().fold(0.0f64, |m, v| m.max(*v));
    let d1_row_sum_err =
        row_sums.iter().zip(&cauchy.d1).map(|(r, d)| (r - d).abs()).fold(0.0, f64::max) / d1_max;

    let sqrt_b: Vec<f64> = b.iter().map(|v| math::sqrt(*v)).collect();
    let sqrt_c: Vec<f64> = c.iter().map(|v| math::sqrt(*v)).collect();
    let ab: Vec<f64> = a.iter().zip(&sqrt_b).map(|(x, y)| x * y).collect();
    let q = qt.scale_rows_cols(&ab, &vec![1.0; n]);
    let column_sum_err = q.column_sums().iter().map(|s| (s - 0.5 * gamma).abs()).fold(0.0, f64::max);

    let inv_sqrt_b: Vec<f64> = sqrt_b.iter().map(|v| 1.0 / v).collect();
    let qt_t = qt.transpose();
    let n2 = qt_t.scale_rows_cols(&vec![1.0; n], &cauchy.d2).mul(&qt.scale_rows_cols(&inv_sqrt_b, &vec![1.0; n]));
    let n2_inv = Lu::new(&n2)?.inverse();
    let scale = n2_inv.max_abs();
    let mut n2_inverse_max_offdiag = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                n2_inverse_max_offdiag = n2_inverse_max_offdiag.max(n2_inv[(i, j)] / scale);
            }
        }
    }
    if n == 1 {
        n2_inverse_max_offdiag = 0.0;
    }

    let coth: Vec<f64> = sqrt_c.iter().map(|k| coth_half(k * horizon)).collect();
    let n1 = Matrix::diag(&sqrt_c.iter().map(|k| 1.0 / k).collect::<Vec<_>>());
    let n3 = Matrix::diag(&(0..n).map(|i| coth[i] / (cauchy.d1[i] * sqrt_c[i])).collect::<Vec<_>>());
    let inv_b: Vec<f64> = b.iter().map(|v| 1.0 / v).collect();
    let n4 = qt_t.scale_rows_cols(&vec![1.0; n], &cauchy.d2).scale_rows_cols(&vec![1.0; n], &inv_b);
    let sum_inv = Lu::new(&n2.add(&n3))?.inverse();
    let u = sum_inv.mul(&n2);
    let u_min_diagonal = (0..n).map(|i| u[(i, i)]).fold(f64::INFINITY, f64::min);

    let nt = n_tilde(b, c, horizon);
    let nt_inv = Lu::new(&nt)?.inverse();
    let weights = nt_inv.mul_vec(&vec![1.0; n]);
    let weights_min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let factored = n1.mul(&sum_inv).mul(&n4);
    let factorization_err = max_abs_diff(&factored, &nt_inv) / nt_inv.max_abs();

    let m = Matrix::from_fn(n, n, |i, j| if i == j { b[i] } else { 0.0 } + 2.0 * lambda * ab[i]);
    let qcq = q.scale_rows_cols(&vec![1.0; n], c).mul(&Lu::new(&q)?.inverse());
    let reconstruction_err = max_abs_diff(&qcq, &m) / m.max_abs();

    Ok(StepReport {
        cauchy_identity_err,
        cauchy_vs_lu_err,
        d1_row_sum_err,
        d1_min: cauchy.d1.iter().copied().fold(f64::INFINITY, f64::min),
        d2_min: cauchy.d2.iter().copied().fold(f64::INFINITY, f64::min),
        column_sum_err,
        n2_inverse_max_offdiag,
        u_min_diagonal,
        weights_min,
        factorization_err,
        reconstruction_err,
    })
}
