//! Shape checks on sampled solutions: symmetry about `T/2`, nonnegativity,
//! convexity and sign patterns of forward differences on the right half.
//!
//! A function symmetric about `T/2` whose forward differences of every order
//! are nonnegative on `(T/2, T)` is the sampled shadow of a symmetrically
//! totally monotone one. Only orders up to a finite `K` are tested.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Default highest difference order.
pub const DEFAULT_MAX_ORDER: usize = 6;

/// Samples per order required by [`analyze`].
pub const SAMPLES_PER_ORDER: usize = 8;

/// Values on a uniform grid `t_k = start + k * step` that is symmetric about
/// `T/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    horizon: f64,
    start: f64,
    step: f64,
    values: Vec<f64>,
    sigma: Option<f64>,
}

impl Samples {
    /// Grid `t_k = k T / (N - 1)`, endpoints included.
    pub fn nodes(horizon: f64, values: Vec<f64>) -> Result<Self> {
        check_horizon(horizon)?;
        if values.len() < 2 {
            return Err(Error::GridTooCoarse { required: 2, actual: values.len() });
        }
        let step = horizon / (values.len() - 1) as f64;
        Ok(Samples { horizon, start: 0.0, step, values, sigma: None })
    }

    /// Grid of cell midpoints `t_k = (k + 1/2) T / N`.
    pub fn midpoints(horizon: f64, values: Vec<f64>) -> Result<Self> {
        check_horizon(horizon)?;
        if values.is_empty() {
            return Err(Error::GridTooCoarse { required: 1, actual: 0 });
        }
        let step = horizon / values.len() as f64;
        Ok(Samples { horizon, start: 0.5 * step, step, values, sigma: None })
    }

    /// Samples `f` at `count` nodes including both endpoints.
    pub fn from_fn_nodes(horizon: f64, count: usize, f: impl FnMut(f64) -> f64) -> Result<Self> {
        check_horizon(horizon)?;
        if count < 2 {
            return Err(Error::GridTooCoarse { required: 2, actual: count });
        }
        let step = horizon / (count - 1) as f64;
        // the last node is pinned to T exactly
        let times = (0..count).map(|k| if k + 1 == count { horizon } else { k as f64 * step });
        Samples::nodes(horizon, times.map(f).collect())
    }

    /// Samples `f` at the midpoints of `count` equal cells.
    pub fn from_fn_midpoints(horizon: f64, count: usize, f: impl FnMut(f64) -> f64) -> Result<Self> {
        check_horizon(horizon)?;
        let step = horizon / count as f64;
        Samples::midpoints(horizon, (0..count).map(|k| (k as f64 + 0.5) * step).map(f).collect())
    }

    /// Attaches the multiplier `σ` used by [`compare`].
    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| self.time(k)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("horizon must be positive, got {horizon}")))
    }
}

/// Smallest forward difference of one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderMinimum {
    pub order: usize,
    /// `min Δ_h^k φ(x)` over `x > T/2`, `x + k h < T`, all grid strides `h`.
    pub min: f64,
    /// The minimum is compared against `-tol * 2^k`.
    pub passes: bool,
}

/// Quantified shape verdicts for one sampled solution.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub tol: f64,
    /// `max |φ(t) - φ(T - t)|` over the grid.
    pub symmetry_err: f64,
    pub min_value: f64,
    /// Most negative centred second difference `φ(x-h) - 2φ(x) + φ(x+h)`
    /// over interior grid points and every stride that fits.
    pub convexity_defect: f64,
    pub diff_orders: Vec<OrderMinimum>,
    pub symmetric: bool,
    pub nonnegative: bool,
    pub convex: bool,
}

impl MonotonicityReport {
    /// Highest `k` such that every order `1..=k` passes.
    pub fn passed_order(&self) -> usize {
        self.diff_orders.iter().take_while(|o| o.passes).count()
    }

    /// Symmetric, nonnegative and every tested order passes.
    pub fn symmetric_totally_monotone(&self) -> bool {
        self.symmetric && self.nonnegative && self.diff_orders.iter().all(|o| o.passes)
    }
}

/// Runs all shape checks at tolerance `tol` up to difference order
/// `max_order`.
///
/// # Errors
///
/// * [`Error::GridTooCoarse`] with fewer than `8 * max_order` samples.
/// * [`Error::InvalidParameter`] for `max_order < 2` or a negative `tol`.
pub fn analyze(samples: &Samples, max_order: usize, tol: f64) -> Result<MonotonicityReport> {
    if max_order < 2 {
        return Err(Error::InvalidParameter(alloc::format!("max_order must be at least 2, got {max_order}")));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("tolerance must be nonnegative, got {tol}")));
    }
    let required = SAMPLES_PER_ORDER * max_order;
    let v = &samples.values;
    let n = v.len();
    if n < required {
        return Err(Error::GridTooCoarse { required, actual: n });
    }

    let symmetry_err = (0..n).map(|k| (v[k] - v[n - 1 - k]).abs()).fold(0.0, f64::max);
    let min_value = v.iter().copied().fold(f64::INFINITY, f64::min);

    let mut convexity_defect = f64::INFINITY;
    for i in 1..n - 1 {
        for s in 1..=i.min(n - 1 - i) {
            convexity_defect = convexity_defect.min(v[i - s] - 2.0 * v[i] + v[i + s]);
        }
    }

    let half = 0.5 * samples.horizon;
    let first = (0..n).find(|&k| samples.time(k) > half).unwrap_or(n);
    // windows must end strictly before T
    let end_limit = samples.horizon * (1.0 - 1e-12);
    let last = (0..n).rev().find(|&k| samples.time(k) < end_limit).unwrap_or(0);

    // Repeated differencing at each stride; exact on constant data.
    let mut mins = alloc::vec![f64::INFINITY; max_order];
    if first <= last {
        let span = last - first;
        let mut d: Vec<f64> = Vec::with_capacity(span + 1);
        for s in 1..=span {
            d.clear();
            d.extend_from_slice(&v[first..=last]);
            for min in mins.iter_mut() {
                if d.len() <= s {
                    break;
                }
                let len = d.len() - s;
                for i in 0..len {
                    d[i] = d[i + s] - d[i];
                }
                d.truncate(len);
                *min = d.iter().copied().fold(*min, f64::min);
            }
        }
    }
    let diff_orders = mins
        .into_iter()
        .enumerate()
        .map(|(i, min)| {
            let k = i + 1;
            // no admissible window at all counts as vacuously satisfied
            let min = if min == f64::INFINITY { 0.0 } else { min };
            let allowance = tol * math::powi(2.0, k as u32);
            OrderMinimum { order: k, min, passes: min >= -allowance }
        })
        .collect();

    Ok(MonotonicityReport {
        tol,
        symmetry_err,
        min_value,
        convexity_defect,
        diff_orders,
        symmetric: symmetry_err <= tol,
        nonnegative: min_value >= -tol,
        convex: convexity_defect >= -tol,
    })
}

/// `1e-7 * max|φ|`, the default tolerance for closed-form samples.
pub fn closed_form_tolerance(samples: &Samples) -> f64 {
    1e-7 * samples.max_abs()
}

/// `10 * residual_max / γ`, the default tolerance for discrete solutions.
pub fn discrete_tolerance(residual_max: f64, gamma: f64) -> f64 {
    10.0 * residual_max / gamma
}

/// Differences between two sampled solutions on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub max_abs: f64,
    /// `(Σ (φ_a - φ_b)² h)^{1/2}`.
    pub l2: f64,
    /// `|σ_a - σ_b| / max(|σ_a|, |σ_b|)`; present when both carry `σ`.
    pub sigma_rel_diff: Option<f64>,
}

pub fn compare(a: &Samples, b: &Samples) -> Result<Comparison> {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
    if a.len() != b.len() || !close(a.horizon, b.horizon) || !close(a.start, b.start) || !close(a.step, b.step) {
        return Err(Error::GridMismatch);
    }
    let mut max_abs = 0.0f64;
    let mut sq = 0.0;
    for (x, y) in a.values.iter().zip(&b.values) {
        let d = x - y;
        max_abs = max_abs.max(d.abs());
        sq += d * d;
    }
    let sigma_rel_diff = match (a.sigma, b.sigma) {
        (Some(x), Some(y)) => {
            let scale = x.abs().max(y.abs());
            Some(if scale == 0.0 { 0.0 } else { (x - y).abs() / scale })
        }
        _ => None,
    };
    Ok(Comparison { max_abs, l2: math::sqrt(sq * a.step), sigma_rel_diff })
}
