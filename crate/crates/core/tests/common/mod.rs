//! Independent numerical oracles shared by the integration tests. Nothing
//! here calls into the crate's own quadrature.
#![allow(dead_code, clippy::too_many_arguments)]

use fredholm_core::kernel::Kernel;

fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson with Richardson correction.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

/// Simpson on each piece between sorted, deduplicated breakpoints.
pub fn simpson_split(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, extra: &[f64], tol: f64) -> f64 {
    let mut breaks = vec![lo, hi];
    breaks.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    breaks.windows(2).map(|w| simpson(f, w[0], w[1], tol)).sum()
}

/// Lag distances at which the kernel is not smooth.
pub fn kinks(k: &Kernel) -> Vec<f64> {
    match k {
        Kernel::CappedLinear(c) => vec![0.0, c.cap()],
        Kernel::PowerCapped(p) => vec![0.0, 1.0 / p.rho()],
        Kernel::Tabulated(t) => {
            let mut v = t.abscissae().to_vec();
            v.push(0.0);
            v
        }
        _ => vec![0.0],
    }
}

fn around(centres: &[f64], dists: &[f64]) -> Vec<f64> {
    centres.iter().flat_map(|c| dists.iter().flat_map(move |d| [c - d, c + d])).collect()
}

/// `∫_lo^hi G(|t - s|) ds`. The power law's inner integral is done from its
/// antiderivative so the singular point never gets sampled.
pub fn single_oracle(k: &Kernel, t: f64, lo: f64, hi: f64) -> f64 {
    if let Kernel::PowerLaw(p) = k {
        let e = 1.0 - p.alpha();
        let prim = |x: f64| p.scale() * x.abs().powf(e) / e * x.signum();
        // ∫_lo^hi |t - s|^{-α} ds = P(t - lo) - P(t - hi) with odd P
        return prim(t - lo) - prim(t - hi);
    }
    let f = |s: f64| k.evaluate((t - s).abs()).unwrap();
    simpson_split(&f, lo, hi, &around(&[t], &kinks(k)), 1e-15)
}

/// `∫∫ G(|t - s|)` over a rectangle, nested adaptive Simpson with every kink
/// of the integrand used as a breakpoint.
pub fn double_oracle(k: &Kernel, x: (f64, f64), y: (f64, f64)) -> f64 {
    let inner = |t: f64| single_oracle(k, t, y.0, y.1);
    simpson_split(&inner, x.0, x.1, &around(&[y.0, y.1], &kinks(k)), 1e-14)
}

/// Richardson-extrapolated tensor midpoint rule, for smooth integrands.
pub fn midpoint_richardson(f: &dyn Fn(f64, f64) -> f64, x: (f64, f64), y: (f64, f64), n: usize) -> f64 {
    let rule = |n: usize| {
        let hx = (x.1 - x.0) / n as f64;
        let hy = (y.1 - y.0) / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += f(x.0 + (i as f64 + 0.5) * hx, y.0 + (j as f64 + 0.5) * hy);
            }
        }
        s * hx * hy
    };
    let (a, b, c) = (rule(n), rule(2 * n), rule(4 * n));
    // two Richardson levels: h^2 then h^4
    let r1 = (4.0 * b - a) / 3.0;
    let r2 = (4.0 * c - b) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Composite Simpson on `n` (even) panels, for smooth closed forms.
pub fn simpson_fixed(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
