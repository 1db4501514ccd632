//! End-to-end checks, one line of output per criterion. Run with
//! `cargo test -p fredholm-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use fredholm_core::diagnostics::{analyze, closed_form_tolerance, discrete_tolerance, Samples};
use fredholm_core::discrete::{discretize, solve, Problem, SolutionGrid};
use fredholm_core::expo::{build_closed_form, verify_step_identities, ExpClosedForm};
use fredholm_core::kernel::{ExponentialSum, Kernel};
use fredholm_core::special::{capped_linear_solve, trig_solve, CappedLinearSolution, TrigSolution};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

enum Exact {
    Exp(ExpClosedForm),
    Capped(CappedLinearSolution),
    Trig(TrigSolution),
}

impl Exact {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Exact::Exp(s) => s.eval(t),
            Exact::Capped(s) => s.eval(t),
            Exact::Trig(s) => s.eval(t),
        }
        .unwrap()
    }

    fn residual(&self, t: f64) -> f64 {
        match self {
            Exact::Exp(s) => s.residual(t),
            Exact::Capped(s) => s.residual(t),
            Exact::Trig(s) => s.residual(t),
        }
    }

    fn sigma(&self) -> f64 {
        match self {
            Exact::Exp(s) => s.sigma(),
            Exact::Capped(s) => s.sigma(),
            Exact::Trig(s) => s.sigma(),
        }
    }

    fn energy(&self) -> f64 {
        match self {
            Exact::Exp(s) => s.energy(),
            Exact::Capped(s) => s.energy(),
            Exact::Trig(s) => s.energy(),
        }
    }
}

struct Fixture {
    name: &'static str,
    exact: Exact,
    problem: Problem,
    breaks: Vec<f64>,
}

impl Fixture {
    fn horizon(&self) -> f64 {
        self.problem.horizon()
    }

    fn grid(&self, count: usize) -> Vec<f64> {
        let t = self.horizon();
        let mut g: Vec<f64> = (0..=count).map(|k| (t * k as f64 / count as f64).min(t)).collect();
        g.extend(self.breaks.iter().copied());
        g
    }
}

fn fixtures() -> Vec<Fixture> {
    let exp = |name, a: Vec<f64>, b: Vec<f64>, gamma, horizon| {
        let k = ExponentialSum::new(a, b).unwrap();
        Fixture {
            name,
            exact: Exact::Exp(build_closed_form(&k, gamma, horizon).unwrap()),
            problem: Problem::new(gamma, horizon, Kernel::ExponentialSum(k)).unwrap(),
            breaks: vec![],
        }
    };
    vec![
        exp("exp n=1", vec![1.0], vec![1.0], 1.0, 1.0),
        exp("exp n=2", vec![1.0, 1.0], vec![1.0, 4.0], 0.5, 2.0),
        Fixture {
            name: "capped n=3",
            exact: Exact::Capped(capped_linear_solve(3, 0.1).unwrap()),
            problem: Problem::new(0.1, 3.0, Kernel::capped_linear(1.0).unwrap()).unwrap(),
            breaks: vec![1.0, 2.0],
        },
        Fixture {
            name: "trig rho=0.5",
            exact: Exact::Trig(trig_solve(0.5, 0.001, 1.0).unwrap()),
            problem: Problem::new(0.001, 1.0, Kernel::trigonometric(0.5).unwrap()).unwrap(),
            breaks: vec![],
        },
    ]
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, detail: String::new() }
    }

    fn check(&mut self, ok: bool, what: String) {
        if !ok {
            self.pass = false;
        }
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&what);
        if !ok {
            self.detail.push_str(" [x]");
        }
    }
}

fn closed_mass(f: &Fixture) -> f64 {
    common::simpson_split(&|t| f.exact.eval(t), 0.0, f.horizon(), &f.breaks, 1e-14)
}

fn closed_symmetry(f: &Fixture) -> f64 {
    let t = f.horizon();
    f.grid(2000).iter().map(|&s| (f.exact.eval(s) - f.exact.eval(t - s)).abs()).fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn c1(fx: &[Fixture], grids: &[SolutionGrid]) -> Outcome {
    let mut o = Outcome::new();
    for (f, g) in fx.iter().zip(grids) {
        let sigma = f.exact.sigma();
        let res = f.grid(2000).iter().map(|&t| f.exact.residual(t)).fold(0.0, f64::max) / sigma;
        o.check(res <= 1e-7, format!("{} closed {:.1e}", f.name, res));
        let dres = g.residual_max / g.sigma;
        o.check(dres <= 1e-3, format!("discrete {:.1e}", dres));
    }
    o
}

fn c2(fx: &[Fixture], grids: &[SolutionGrid]) -> Outcome {
    let mut o = Outcome::new();
    for (f, g) in fx.iter().zip(grids) {
        let sigma = f.exact.sigma();
        let e = rel(sigma, 2.0 * f.exact.energy());
        o.check(e <= 1e-9 && sigma > 0.0, format!("{} closed {:.1e}", f.name, e));
        let d = rel(g.sigma, 2.0 * g.energy);
        o.check(d <= 1e-9 && g.sigma > 0.0, format!("discrete {:.1e}", d));
    }
    o
}

fn c3(fx: &[Fixture], grids: &[SolutionGrid]) -> Outcome {
    let mut o = Outcome::new();
    for (f, g) in fx.iter().zip(grids) {
        let mass = (closed_mass(f) - 1.0).abs();
        let sym = closed_symmetry(f);
        o.check(mass <= 1e-12 && sym <= 1e-9, format!("{} closed mass {:.1e} sym {:.1e}", f.name, mass, sym));
        let dmass = (g.mass() - 1.0).abs();
        let dsym = g.symmetry_error();
        o.check(dmass <= 1e-12 && dsym <= 1e-7, format!("discrete mass {:.1e} sym {:.1e}", dmass, dsym));
    }
    o
}

fn c4() -> Outcome {
    let mut o = Outcome::new();
    let mut failures = 0;
    let mut worst_z = f64::INFINITY;
    let mut worst_energy: f64 = 0.0;
    let mut count = 0;
    for seed in 0..20u64 {
        let mut rng = StdRng::seed_from_u64(seed);
        for n in 1..=3 {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
            let mut b = Vec::with_capacity(n);
            let mut acc = 0.0;
            for _ in 0..n {
                acc += rng.gen_range(0.2..5.0);
                b.push(acc);
            }
            let gamma = rng.gen_range(0.05..2.0);
            let horizon = rng.gen_range(0.5..3.0);
            let cf = build_closed_form(&ExponentialSum::new(a, b).unwrap(), gamma, horizon).unwrap();
            let zmin = cf.z().iter().copied().fold(f64::INFINITY, f64::min);
            worst_z = worst_z.min(zmin);
            worst_energy = worst_energy.max(rel(cf.sigma(), 2.0 * cf.energy()));
            let s = Samples::from_fn_nodes(horizon, 1601, |t| cf.eval(t).unwrap()).unwrap();
            let r = analyze(&s, 6, closed_form_tolerance(&s)).unwrap();
            let ok = zmin >= -1e-12 && cf.spectrum().interlaces() && r.symmetric_totally_monotone() && cf.sigma() > 0.0;
            if !ok {
                failures += 1;
            }
            count += 1;
        }
    }
    o.check(failures == 0, format!("{} of {count} cases fail", failures));
    o.check(worst_z >= -1e-12, format!("min z {:.3e}", worst_z));
    o.check(worst_energy <= 1e-9, format!("max |sigma - 2J|/sigma {:.1e}", worst_energy));
    o
}

fn c5() -> Outcome {
    let mut o = Outcome::new();
    let capped = capped_linear_solve(11, 0.01).unwrap();
    let s = Samples::from_fn_nodes(11.0, 4401, |t| capped.eval(t).unwrap()).unwrap();
    let tol = closed_form_tolerance(&s);
    let r = analyze(&s, 6, tol).unwrap();
    o.check(
        r.min_value >= -1e-8 && r.convexity_defect < -10.0 * tol,
        format!("capped min {:.3e} defect {:.3e} tol {:.1e}", r.min_value, r.convexity_defect, tol),
    );
    o.check(rel(capped.sigma(), 2.0 * capped.energy()) <= 1e-9, "capped sigma = 2J".into());

    let trig = trig_solve(0.5, 0.001, 1.0).unwrap();
    let min = (0..=10_000).map(|k| trig.eval(k as f64 / 10_000.0).unwrap()).fold(f64::INFINITY, f64::min);
    o.check(min < 0.0, format!("trig min {:.3e}", min));

    for p in [4, 5] {
        let problem = Problem::new(0.001, 1.0, Kernel::power_capped(10.0, p).unwrap()).unwrap();
        let g = solve(&problem, 2048).unwrap();
        let s = Samples::midpoints(1.0, g.values.clone()).unwrap();
        let tol = discrete_tolerance(g.residual_max, 0.001);
        let r = analyze(&s, 6, tol).unwrap();
        o.check(!r.convex, format!("power-capped p={p} defect {:.3e} tol {:.1e}", r.convexity_defect, tol));
        o.check(rel(g.sigma, 2.0 * g.energy) <= 1e-9 && g.sigma > 0.0, format!("p={p} sigma = 2J"));
    }
    o
}

fn c6(fx: &[Fixture]) -> Outcome {
    let mut o = Outcome::new();
    for f in fx {
        let errs: Vec<f64> = [512, 1024, 2048]
            .iter()
            .map(|&m| {
                let g = solve(&f.problem, m).unwrap();
                let exact: Vec<f64> = g.midpoints().iter().map(|&t| f.exact.eval(t)).collect();
                common::max_abs_diff(&exact, &g.values)
            })
            .collect();
        let ok = errs[1] <= 5e-3 && errs[2] <= 5e-3 && errs[0] > errs[1] && errs[1] > errs[2];
        o.check(ok, format!("{} {:.1e} > {:.1e} > {:.1e}", f.name, errs[0], errs[1], errs[2]));
    }
    o
}

fn c7() -> Outcome {
    let mut o = Outcome::new();
    let cases: [(&[f64], &[f64], f64, f64); 4] = [
        (&[1.0], &[1.0], 1.0, 1.0),
        (&[1.0, 1.0], &[1.0, 4.0], 0.5, 2.0),
        (&[0.5, 1.0, 2.0], &[0.5, 2.0, 6.0], 0.2, 1.5),
        (&[1.0, 0.3, 0.7, 1.2], &[0.3, 1.0, 2.5, 5.0], 0.1, 1.0),
    ];
    let (mut ident, mut cols, mut recon) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b, gamma, horizon) in cases {
        let r = verify_step_identities(&ExponentialSum::new(a.to_vec(), b.to_vec()).unwrap(), gamma, horizon).unwrap();
        ident = ident.max(r.cauchy_identity_err);
        cols = cols.max(r.column_sum_err);
        recon = recon.max(r.reconstruction_err);
    }
    o.check(ident <= 1e-10, format!("cauchy identity {:.1e}", ident));
    o.check(cols <= 1e-10, format!("column sums {:.1e}", cols));
    o.check(recon <= 1e-9, format!("reconstruction {:.1e}", recon));
    o
}

fn c8() -> Outcome {
    let mut o = Outcome::new();
    let cf = build_closed_form(&ExponentialSum::new(vec![1.0], vec![1.0]).unwrap(), 1.0, 1.0).unwrap();
    // c = b + (2/γ)√b at b = γ = 1
    o.check((cf.c()[0] - 3.0).abs() <= 1e-12, format!("c = {:.15}", cf.c()[0]));
    let r3 = 3f64.sqrt();
    let shape = |t: f64| 1.0 + 2.0 * ((r3 * t).exp() + (r3 * (1.0 - t)).exp()) / (r3.exp() * (1.0 + r3) + 1.0 - r3);
    let mass = common::simpson(&shape, 0.0, 1.0, 1e-15);
    let err = (0..=200)
        .map(|k| k as f64 / 200.0)
        .map(|t| (cf.eval(t).unwrap() - shape(t) / mass).abs())
        .fold(0.0, f64::max);
    o.check(err <= 1e-12, format!("pointwise {:.1e}", err));
    o
}

/// `∫_lo^hi G(h(k + s)) w(s) ds` split at the kernel's kinks.
fn lag_piece(kernel: &Kernel, h: f64, k: f64, lo: f64, hi: f64, w: &dyn Fn(f64) -> f64) -> f64 {
    let kinks: Vec<f64> = common::kinks(kernel).iter().map(|c| c / h - k).collect();
    let f = |s: f64| kernel.evaluate(h * (k + s)).unwrap() * w(s);
    common::simpson_split(&f, lo, hi, &kinks, 1e-15)
}

/// `∫_0^1 (h r)^{-α} w(r) dr` after `r = u^{1/(1-α)}`, which turns the
/// singular factor into the constant `1/(1-α)`.
fn power_law_piece(alpha: f64, scale: f64, h: f64, w: &dyn Fn(f64) -> f64) -> f64 {
    let e = 1.0 - alpha;
    let f = |u: f64| w(u.powf(1.0 / e));
    scale * h.powf(-alpha) / e * common::simpson(&f, 0.0, 1.0, 1e-15)
}

fn entry_by_quadrature(kernel: &Kernel, gamma: f64, h: f64, k: usize) -> f64 {
    let power = match kernel {
        Kernel::PowerLaw(p) => Some((p.alpha(), p.scale())),
        _ => None,
    };
    if k == 0 {
        let w = |s: f64| 1.0 - s;
        let integral = match power {
            Some((a, c)) => power_law_piece(a, c, h, &w),
            None => lag_piece(kernel, h, 0.0, 0.0, 1.0, &w),
        };
        return 0.5 * gamma * h + h * h * integral;
    }
    let kf = k as f64;
    let left = match power {
        // r = 1 + s runs from the singular point
        Some((a, c)) if k == 1 => power_law_piece(a, c, h, &|r| r),
        _ => lag_piece(kernel, h, kf, -1.0, 0.0, &|s| 1.0 + s),
    };
    let right = lag_piece(kernel, h, kf, 0.0, 1.0, &|s| 1.0 - s);
    0.5 * h * h * (left + right)
}

fn c9() -> Outcome {
    let mut o = Outcome::new();
    let kernels = [
        ("exp", Kernel::exponential_sum(vec![1.0, 0.5], vec![1.0, 9.0]).unwrap()),
        ("capped", Kernel::capped_linear(0.3).unwrap()),
        ("power-capped", Kernel::power_capped(10.0, 4).unwrap()),
        ("trig", Kernel::trigonometric(0.5).unwrap()),
        ("power-law", Kernel::power_law(0.4, 1.5).unwrap()),
        ("tabulated", Kernel::tabulated(vec![0.0, 0.2, 0.5, 1.0], vec![1.0, 0.6, 0.3, 0.2]).unwrap()),
    ];
    let gamma = 0.05;
    for (name, kernel) in kernels {
        let mut worst = 0.0f64;
        for n in [3u32, 6, 10] {
            let m = 1usize << n;
            let h = 1.0 / m as f64;
            let problem = Problem::new(gamma, 1.0, kernel.clone()).unwrap();
            let form = discretize(&problem, m).unwrap();
            let lags: Vec<usize> = (0..m).filter(|k| m <= 64 || *k < 16 || k % 61 == 0).collect();
            for k in lags {
                let want = entry_by_quadrature(&kernel, gamma, h, k);
                let got = form.entry(0, k);
                worst = worst.max(if want == 0.0 { got.abs() } else { rel(got, want) });
            }
        }
        o.check(worst <= 1e-8, format!("{name} {:.1e}", worst));
    }
    o
}

fn main() -> ExitCode {
    let fx = fixtures();
    let grids: Vec<SolutionGrid> = fx.iter().map(|f| solve(&f.problem, 1024).unwrap()).collect();
    let criteria: [&dyn Fn() -> Outcome; 9] = [
        &|| c1(&fx, &grids),
        &|| c2(&fx, &grids),
        &|| c3(&fx, &grids),
        &c4,
        &c5,
        &|| c6(&fx),
        &c7,
        &c8,
        &c9,
    ];
    let results: Vec<(Outcome, f64)> = criteria
        .iter()
        .map(|c| {
            let start = Instant::now();
            let r = c();
            (r, start.elapsed().as_secs_f64())
        })
        .collect();
    let mut all = true;
    for (i, (r, secs)) in results.iter().enumerate() {
        all &= r.pass;
        println!("criterion {}: {} ({}) [{secs:.2}s]", i + 1, if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
