//! Gauss-Legendre and adaptive Gauss-Kronrod quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = math::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]` with a single application of the rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Composite rule over `pieces` equal subintervals of `[a, b]`.
    pub fn integrate_composite(
        &self,
        a: f64,
        b: f64,
        pieces: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        let width = (b - a) / pieces as f64;
        (0..pieces)
            .map(|k| {
                let lo = a + k as f64 * width;
                let hi = if k + 1 == pieces { b } else { lo + width };
                self.integrate(lo, hi, &mut f)
            })
            .sum()
    }

    /// Composite rule on each interval between consecutive `breaks`.
    /// Breakpoints must be sorted; empty intervals are skipped.
    pub fn integrate_piecewise(
        &self,
        breaks: &[f64],
        pieces: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| self.integrate_composite(w[0], w[1], pieces, &mut f))
            .sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

// Kronrod 15-point abscissae and weights with the embedded 7-point Gauss
// weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Intervals are bisected until the embedded error estimate falls below
/// `max(abs_tol, rel_tol * |local estimate|)` or the bisection depth reaches
/// 48.
pub fn adaptive(a: f64, b: f64, abs_tol: f64, rel_tol: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut total = 0.0;
    let mut stack: Vec<(f64, f64, f64, u32)> = Vec::new();
    let width = (b - a).abs();
    stack.push((a, b, abs_tol, 0));
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let (est, err) = kronrod15(lo, hi, &mut f);
        if err <= tol.max(rel_tol * est.abs()) || depth >= 48 {
            total += est;
        } else {
            let mid = 0.5 * (lo + hi);
            let share = tol * 0.5_f64.max((mid - lo).abs() / width);
            stack.push((lo, mid, share, depth + 1));
            stack.push((mid, hi, share, depth + 1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(6);
        // degree 11 is integrated exactly by 6 points
        let got = rule.integrate(-1.0, 2.0, |x| math::powi(x, 11) - 3.0 * x * x);
        let exact = (math::powi(2.0, 12) - 1.0) / 12.0 - (8.0 + 1.0);
        assert!((got - exact).abs() < 1e-10);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2
        let got = adaptive(0.0, 1.0, 1e-13, 1e-13, |x| 1.0 / math::sqrt(x));
        assert!((got - 2.0).abs() < 1e-8);
        let smooth = adaptive(0.0, PI, 1e-14, 1e-14, math::sin);
        assert!((smooth - 2.0).abs() < 1e-13);
    }
}
