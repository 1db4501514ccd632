//! Displacement kernels `G(|t - s|)` and their exact integrals over grid cells.
//!
//! Every family exposes three building blocks, all taken over a gap `g >= 0`
//! measured from the origin:
//!
//! * `tail(g, w)     = ∫_0^w G(g + u) du`
//! * `tail2(g, a, b) = ∫_0^a ∫_0^b G(g + u + v) dv du`
//! * `self2(w)       = ∫_0^w ∫_0^w G(|t - s|) ds dt`
//!
//! Any rectangle `[x_lo, x_hi] x [y_lo, y_hi]` splits into one diagonal
//! square plus pieces whose intervals are disjoint or touching, so these
//! three primitives are enough for exact cell integrals. Writing them relative
//! to the gap (rather than as differences of a global second antiderivative)
//! keeps small far-apart cells free of cancellation.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::quadrature;

/// A displacement kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    ExponentialSum(ExponentialSum),
    CappedLinear(CappedLinear),
    PowerCapped(PowerCapped),
    Trigonometric(Trigonometric),
    PowerLaw(PowerLaw),
    Tabulated(Tabulated),
}

/// `G(t) = Σ a_k exp(-sqrt(b_k) t)` with positive weights and strictly
/// increasing positive `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialSum {
    a: Vec<f64>,
    b: Vec<f64>,
    rates: Vec<f64>,
}

/// `G(t) = (cap - t)^+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CappedLinear {
    cap: f64,
}

/// `G(t) = ((1 - rho t)^+)^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCapped {
    rho: f64,
    power: u32,
}

/// `G(t) = cos(rho t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trigonometric {
    rho: f64,
}

/// `G(t) = scale * t^{-alpha}` with `0 < alpha < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    alpha: f64,
    scale: f64,
}

/// How a [`Tabulated`] kernel fills in values between its abscissae.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Linear in `log G`; used when every tabulated value is positive.
    LogLinear,
    Linear,
}

/// Kernel sampled at strictly increasing abscissae. Outside the table the
/// nearest tabulated value is held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    abscissae: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
}

/// Structural facts about a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelStructure {
    pub nonincreasing: bool,
    pub convex: bool,
    pub completely_monotone: bool,
    pub positive_type_known: bool,
    /// Finite-difference evidence; only present for tabulated kernels.
    pub evidence: Option<DifferenceEvidence>,
}

/// Outcome of sign tests on the divided differences of a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceEvidence {
    pub tolerance: f64,
    /// Largest `k <= MAX_EVIDENCE_ORDER` such that `(-1)^j` times every
    /// divided difference of order `j <= k` is at least `-tolerance`.
    pub alternating_order: usize,
}

pub const MAX_EVIDENCE_ORDER: usize = 6;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidKernel(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExponentialSum {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidKernel("exponential sum needs at least one term".into()));
        }
        if a.len() != b.len() {
            return Err(Error::InvalidKernel(format!(
                "weights and rates differ in length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        for &ak in &a {
            check_positive("weight a_k", ak)?;
        }
        check_positive("b_1", b[0])?;
        if b.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidKernel("b must be strictly increasing".into()));
        }
        let rates = b.iter().map(|&v| math::sqrt(v)).collect();
        Ok(ExponentialSum { a, b, rates })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.a.iter().copied().zip(self.rates.iter().copied())
    }
}

impl CappedLinear {
    pub fn new(cap: f64) -> Result<Self> {
        check_positive("cap", cap)?;
        Ok(CappedLinear { cap })
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }
}

impl PowerCapped {
    pub fn new(rho: f64, power: u32) -> Result<Self> {
        check_positive("rho", rho)?;
        if power == 0 {
            return Err(Error::InvalidKernel("power must be a positive integer".into()));
        }
        Ok(PowerCapped { rho, power })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn power(&self) -> u32 {
        self.power
    }
}

impl Trigonometric {
    pub fn new(rho: f64) -> Result<Self> {
        check_positive("rho", rho)?;
        Ok(Trigonometric { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

impl PowerLaw {
    pub fn new(alpha: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidKernel(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        check_positive("scale", scale)?;
        Ok(PowerLaw { alpha, scale })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl Tabulated {
    pub fn new(abscissae: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if abscissae.len() < 2 || abscissae.len() != values.len() {
            return Err(Error::InvalidKernel(
                "table needs at least two abscissae and one value per abscissa".into(),
            ));
        }
        if !(abscissae[0] >= 0.0) || abscissae.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidKernel("abscissae must be finite and nonnegative".into()));
        }
        if abscissae.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidKernel("abscissae must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidKernel("tabulated values must be finite and nonnegative".into()));
        }
        let interpolation = if values.iter().all(|&v| v > 0.0) {
            Interpolation::LogLinear
        } else {
            Interpolation::Linear
        };
        Ok(Tabulated { abscissae, values, interpolation })
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Sign tests on divided differences of the table up to
    /// [`MAX_EVIDENCE_ORDER`].
    pub fn difference_evidence(&self, tolerance: f64) -> DifferenceEvidence {
        let x = &self.abscissae;
        let mut diffs = self.values.clone();
        let mut order = 0;
        for k in 1..=MAX_EVIDENCE_ORDER.min(x.len() - 1) {
            diffs = (0..diffs.len() - 1)
                .map(|i| (diffs[i + 1] - diffs[i]) / (x[i + k] - x[i]))
                .collect();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            // Divided differences are scaled to value units by the span of
            // the stencil so one tolerance fits all orders.
            let ok = diffs.iter().enumerate().all(|(i, d)| {
                let span = math::powi(x[i + k] - x[i], k as u32);
                sign * d * span >= -tolerance
            });
            if !ok {
                break;
            }
            order = k;
        }
        DifferenceEvidence { tolerance, alternating_order: order }
    }

    fn segment(&self, t: f64) -> Option<usize> {
        let x = &self.abscissae;
        if t <= x[0] || t >= x[x.len() - 1] {
            return None;
        }
        Some(x.partition_point(|&v| v <= t) - 1)
    }

    fn interpolate(&self, t: f64) -> f64 {
        let (x, y) = (&self.abscissae, &self.values);
        match self.segment(t) {
            None if t <= x[0] => y[0],
            None => y[y.len() - 1],
            Some(i) => {
                let theta = (t - x[i]) / (x[i + 1] - x[i]);
                match self.interpolation {
                    Interpolation::Linear => y[i] + theta * (y[i + 1] - y[i]),
                    Interpolation::LogLinear => y[i] * math::exp(theta * math::ln(y[i + 1] / y[i])),
                }
            }
        }
    }

    /// `∫_lo^hi G(g + r) w(r) dr`, split at the table knots.
    fn weighted(&self, gap: f64, lo: f64, hi: f64, weight: impl Fn(f64) -> f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let vmax = self.values.iter().fold(0.0f64, |m, v| m.max(*v));
        let abs_tol = 1e-16 * vmax * (hi - lo) * (hi - lo).max(1e-300);
        let mut breaks: Vec<f64> = Vec::with_capacity(self.abscissae.len() + 2);
        breaks.push(lo);
        breaks.extend(self.abscissae.iter().map(|x| x - gap).filter(|&r| r > lo && r < hi));
        breaks.push(hi);
        breaks
            .windows(2)
            .map(|w| {
                quadrature::adaptive(w[0], w[1], abs_tol, 1e-13, |r| {
                    self.interpolate(gap + r) * weight(r)
                })
            })
            .sum()
    }
}

trait Profile {
    fn value(&self, t: f64) -> f64;
    fn tail(&self, gap: f64, width: f64) -> f64;
    fn tail2(&self, gap: f64, w1: f64, w2: f64) -> f64;
    fn self2(&self, width: f64) -> f64;
}

impl Profile for ExponentialSum {
    fn value(&self, t: f64) -> f64 {
        self.terms().map(|(a, r)| a * math::exp(-r * t)).sum()
    }

    fn tail(&self, gap: f64, width: f64) -> f64 {
        self.terms()
            .map(|(a, r)| a * math::exp(-r * gap) * width * math::one_minus_exp_ratio(r * width))
            .sum()
    }

    fn tail2(&self, gap: f64, w1: f64, w2: f64) -> f64 {
        self.terms()
            .map(|(a, r)| {
                a * math::exp(-r * gap)
                    * w1
                    * w2
                    * math::one_minus_exp_ratio(r * w1)
                    * math::one_minus_exp_ratio(r * w2)
            })
            .sum()
    }

    fn self2(&self, width: f64) -> f64 {
        self.terms().map(|(a, r)| 2.0 * a * width * width * math::exp_defect_ratio(r * width)).sum()
    }
}

// ∫_0^x (c - u)^+ du
fn capped_first(c: f64, x: f64) -> f64 {
    if x <= c {
        x * (c - 0.5 * x)
    } else {
        0.5 * c * c
    }
}

// ∫_0^x (x - u)(c - u)^+ du
fn capped_second(c: f64, x: f64) -> f64 {
    if x <= c {
        x * x * (0.5 * c - x / 6.0)
    } else {
        0.5 * c * c * x - c * c * c / 6.0
    }
}

impl Profile for CappedLinear {
    fn value(&self, t: f64) -> f64 {
        (self.cap - t).max(0.0)
    }

    fn tail(&self, gap: f64, width: f64) -> f64 {
        let c = self.cap - gap;
        if c <= 0.0 {
            0.0
        } else {
            capped_first(c, width)
        }
    }

    fn tail2(&self, gap: f64, w1: f64, w2: f64) -> f64 {
        let c = self.cap - gap;
        if c <= 0.0 {
            return 0.0;
        }
        capped_second(c, w1 + w2) - capped_second(c, w1) - capped_second(c, w2)
    }

    fn self2(&self, width: f64) -> f64 {
        2.0 * capped_second(self.cap, width)
    }
}

impl PowerCapped {
    // ∫_0^x ((1 - rho u)^+)^p du
    fn first(rho: f64, p: u32, x: f64) -> f64 {
        let y = rho * x;
        let q = (p + 1) as f64;
        if y >= 1.0 {
            return 1.0 / (rho * q);
        }
        // 1 - (1 - y)^{p+1}
        -math::expm1(q * math::ln1p(-y)) / (rho * q)
    }

    // ∫_0^x (x - u) ((1 - rho u)^+)^p du
    fn second(rho: f64, p: u32, x: f64) -> f64 {
        let y = rho * x;
        let q1 = (p + 1) as f64;
        let q2 = (p + 2) as f64;
        if y >= 1.0 {
            return 1.0 / (rho * rho * q2) + (x - 1.0 / rho) / (rho * q1);
        }
        let numerator = if y < 0.5 {
            // (p+2) y - 1 + (1-y)^{p+2}, expanded; the linear terms cancel.
            let mut acc = 0.0;
            for k in 2..=p + 2 {
                let term = math::binomial(p + 2, k) * math::powi(y, k);
                acc += if k % 2 == 0 { term } else { -term };
            }
            acc
        } else {
            q2 * y + math::expm1(q2 * math::ln1p(-y))
        };
        numerator / (rho * rho * q1 * q2)
    }

    // G(g + u) = k^p ((1 - rho/k u)^+)^p with k = 1 - rho g
    fn shifted(&self, gap: f64) -> Option<(f64, f64)> {
        let k = 1.0 - self.rho * gap;
        if k <= 0.0 {
            None
        } else {
            Some((math::powi(k, self.power), self.rho / k))
        }
    }
}

impl Profile for PowerCapped {
    fn value(&self, t: f64) -> f64 {
        math::powi((1.0 - self.rho * t).max(0.0), self.power)
    }

    fn tail(&self, gap: f64, width: f64) -> f64 {
        match self.shifted(gap) {
            None => 0.0,
            Some((amp, rho)) => amp * Self::first(rho, self.power, width),
        }
    }

    fn tail2(&self, gap: f64, w1: f64, w2: f64) -> f64 {
        match self.shifted(gap) {
            None => 0.0,
            Some((amp, rho)) => {
                let p = self.power;
                amp * (Self::second(rho, p, w1 + w2) - Self::second(rho, p, w1) - Self::second(rho, p, w2))
            }
        }
    }

    fn self2(&self, width: f64) -> f64 {
        2.0 * Self::second(self.rho, self.power, width)
    }
}

impl Profile for Trigonometric {
    fn value(&self, t: f64) -> f64 {
        math::cos(self.rho * t)
    }

    fn tail(&self, gap: f64, width: f64) -> f64 {
        let r = self.rho;
        2.0 / r * math::sin(0.5 * r * width) * math::cos(r * (gap + 0.5 * width))
    }

    fn tail2(&self, gap: f64, w1: f64, w2: f64) -> f64 {
        let r = self.rho;
        4.0 / (r * r)
            * math::sin(0.5 * r * w1)
            * math::sin(0.5 * r * w2)
            * math::cos(r * (gap + 0.5 * (w1 + w2)))
    }

    fn self2(&self, width: f64) -> f64 {
        let s = math::sin(0.5 * self.rho * width) / self.rho;
        4.0 * s * s
    }
}

impl PowerLaw {
    fn exponent(&self) -> f64 {
        1.0 - self.alpha
    }

    // ∫_0^x (x - u) G(u) du
    fn second(&self, x: f64) -> f64 {
        let e = self.exponent();
        self.scale * math::powf(x, 1.0 + e) / (e * (1.0 + e))
    }
}

impl Profile for PowerLaw {
    fn value(&self, t: f64) -> f64 {
        self.scale * math::powf(t, -self.alpha)
    }

    fn tail(&self, gap: f64, width: f64) -> f64 {
        let e = self.exponent();
        if gap == 0.0 {
            return self.scale * math::powf(width, e) / e;
        }
        // ((g + w)^e - g^e) / e written to survive g >> w
        self.scale * math::powf(gap, e) * math::expm1(e * math::ln1p(width / gap)) / e
    }

    fn tail2(&self, gap: f64, w1: f64, w2: f64) -> f64 {
        if gap < w1 + w2 {
            let s = |x: f64| self.second(x);
            s(gap + w1 + w2) - s(gap + w1) - s(gap + w2) + s(gap)
        } else {
            // Away from the singularity the integrand is smooth.
            let scale = self.value(gap) * w1 * w2;
            quadrature::adaptive(0.0, w1, 1e-16 * scale, 1e-14, |u| self.tail(gap + u, w2))
        }
    }

    fn self2(&self, width: f64) -> f64 {
        2.0 * self.second(width)
    }
}

impl Profile for Tabulated {
    fn value(&self, t: f64) -> f64 {
        self.interpolate(t)
    }

    fn tail(&self, gap: f64, width: f64) -> f64 {
        self.weighted(gap, 0.0, width, |_| 1.0)
    }

    fn tail2(&self, gap: f64, w1: f64, w2: f64) -> f64 {
        let (short, long) = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
        let total = w1 + w2;
        let trapezoid = move |r: f64| r.min(short).min(total - r).max(0.0);
        self.weighted(gap, 0.0, short, trapezoid)
            + self.weighted(gap, short, long, trapezoid)
            + self.weighted(gap, long, total, trapezoid)
    }

    fn self2(&self, width: f64) -> f64 {
        2.0 * self.weighted(0.0, 0.0, width, |u| width - u)
    }
}

macro_rules! dispatch {
    ($self:expr, $k:ident => $body:expr) => {
        match $self {
            Kernel::ExponentialSum($k) => $body,
            Kernel::CappedLinear($k) => $body,
            Kernel::PowerCapped($k) => $body,
            Kernel::Trigonometric($k) => $body,
            Kernel::PowerLaw($k) => $body,
            Kernel::Tabulated($k) => $body,
        }
    };
}

impl Kernel {
    pub fn exponential_sum(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        ExponentialSum::new(a, b).map(Kernel::ExponentialSum)
    }

    pub fn capped_linear(cap: f64) -> Result<Self> {
        CappedLinear::new(cap).map(Kernel::CappedLinear)
    }

    pub fn power_capped(rho: f64, power: u32) -> Result<Self> {
        PowerCapped::new(rho, power).map(Kernel::PowerCapped)
    }

    pub fn trigonometric(rho: f64) -> Result<Self> {
        Trigonometric::new(rho).map(Kernel::Trigonometric)
    }

    pub fn power_law(alpha: f64, scale: f64) -> Result<Self> {
        PowerLaw::new(alpha, scale).map(Kernel::PowerLaw)
    }

    pub fn tabulated(abscissae: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Tabulated::new(abscissae, values).map(Kernel::Tabulated)
    }

    /// Short lowercase name of the family, as used in configuration files.
    pub fn family(&self) -> &'static str {
        match self {
            Kernel::ExponentialSum(_) => "exponential_sum",
            Kernel::CappedLinear(_) => "capped_linear",
            Kernel::PowerCapped(_) => "power_capped",
            Kernel::Trigonometric(_) => "trigonometric",
            Kernel::PowerLaw(_) => "power_law",
            Kernel::Tabulated(_) => "tabulated",
        }
    }

    /// `G(t)` for `t >= 0`. The power law is singular at the origin.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain { what: "kernel argument", value: t });
        }
        if t == 0.0 && matches!(self, Kernel::PowerLaw(_)) {
            return Err(Error::Domain { what: "power-law kernel argument", value: t });
        }
        Ok(dispatch!(self, k => k.value(t)))
    }

    /// `∫_0^w G(g + u) du` for `g, w >= 0`.
    pub fn tail_integral(&self, gap: f64, width: f64) -> f64 {
        if width <= 0.0 {
            return 0.0;
        }
        dispatch!(self, k => k.tail(gap, width))
    }

    /// `∫_lo^hi G(|t - s|) ds`.
    pub fn cell_integral(&self, t: f64, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        if t <= lo {
            self.tail_integral(lo - t, hi - lo)
        } else if t >= hi {
            self.tail_integral(t - hi, hi - lo)
        } else {
            self.tail_integral(0.0, t - lo) + self.tail_integral(0.0, hi - t)
        }
    }

    /// `∫_{x_lo}^{x_hi} ∫_{y_lo}^{y_hi} G(|t - s|) ds dt`.
    ///
    /// Exact for every analytic family (including on the diagonal of the
    /// power law); tabulated kernels go through adaptive quadrature.
    pub fn cell_double_integral(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> f64 {
        if x_hi <= x_lo || y_hi <= y_lo {
            return 0.0;
        }
        let lo = x_lo.max(y_lo);
        let hi = x_hi.min(y_hi);
        if hi <= lo {
            return self.separated(x_lo, x_hi, y_lo, y_hi);
        }
        let xs = [(x_lo, lo), (lo, hi), (hi, x_hi)];
        let ys = [(y_lo, lo), (lo, hi), (hi, y_hi)];
        let mut total = 0.0;
        for (i, &(a, b)) in xs.iter().enumerate() {
            if b <= a {
                continue;
            }
            for (j, &(c, d)) in ys.iter().enumerate() {
                if d <= c {
                    continue;
                }
                total += if i == 1 && j == 1 {
                    dispatch!(self, k => k.self2(hi - lo))
                } else {
                    self.separated(a, b, c, d)
                };
            }
        }
        total
    }

    // Intervals [a, b] and [c, d] that overlap in at most one point.
    fn separated(&self, a: f64, b: f64, c: f64, d: f64) -> f64 {
        let gap = if b <= c { c - b } else { a - d };
        dispatch!(self, k => k.tail2(gap.max(0.0), b - a, d - c))
    }

    /// Structural flags, analytic for the closed families and from
    /// finite-difference sign tests for tables.
    pub fn classify(&self) -> KernelStructure {
        let analytic = |nonincreasing, convex, completely_monotone, positive_type_known| {
            KernelStructure {
                nonincreasing,
                convex,
                completely_monotone,
                positive_type_known,
                evidence: None,
            }
        };
        match self {
            Kernel::ExponentialSum(_) | Kernel::PowerLaw(_) => analytic(true, true, true, true),
            Kernel::CappedLinear(_) | Kernel::PowerCapped(_) => analytic(true, true, false, true),
            Kernel::Trigonometric(_) => analytic(false, false, false, true),
            Kernel::Tabulated(table) => {
                let vmax = table.values.iter().fold(0.0f64, |m, v| m.max(*v));
                let evidence = table.difference_evidence(1e-12 * vmax.max(f64::MIN_POSITIVE));
                let nonincreasing = evidence.alternating_order >= 1;
                let convex = evidence.alternating_order >= 2;
                KernelStructure {
                    nonincreasing,
                    convex,
                    completely_monotone: false,
                    // Nonnegative, nonincreasing and convex implies positive type.
                    positive_type_known: nonincreasing && convex,
                    evidence: Some(evidence),
                }
            }
        }
    }
}
