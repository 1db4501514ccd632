//! Solver dispatch and the checks that decide the exit status.

use fredholm_core::diagnostics::{
    analyze, closed_form_tolerance, discrete_tolerance, MonotonicityReport, Samples, DEFAULT_MAX_ORDER,
};
use fredholm_core::discrete::{solve, Problem, SolutionGrid};
use fredholm_core::expo::{build_closed_form, ExpClosedForm};
use fredholm_core::kernel::Kernel;
use fredholm_core::quadrature::GaussLegendre;
use fredholm_core::special::{capped_linear_solve, trig_solve, CappedLinearSolution, TrigSolution};
use serde_json::{json, Value};

use crate::config::{capped_segments, KernelSpec, Method, RunConfig, ShapeCheck};
use crate::error::CliError;

pub const SIGMA_TOL: f64 = 1e-9;
pub const MASS_TOL: f64 = 1e-12;
pub const CLOSED_SYMMETRY_TOL: f64 = 1e-9;
pub const DISCRETE_SYMMETRY_TOL: f64 = 1e-7;
pub const CLOSED_RESIDUAL_TOL: f64 = 1e-7;
pub const DISCRETE_RESIDUAL_TOL: f64 = 1e-3;

pub enum Solution {
    Discrete(SolutionGrid),
    Exp(ExpClosedForm),
    Capped(CappedLinearSolution),
    Trig(TrigSolution),
}

impl Solution {
    pub fn method(&self) -> Method {
        match self {
            Solution::Discrete(_) => Method::Discrete,
            Solution::Exp(_) => Method::ExpClosedForm,
            Solution::Capped(_) => Method::CappedLinear,
            Solution::Trig(_) => Method::Trig,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Solution::Discrete(_))
    }

    pub fn eval(&self, t: f64) -> Result<f64, CliError> {
        Ok(match self {
            Solution::Discrete(g) => g.value_at(t)?,
            Solution::Exp(s) => s.eval(t)?,
            Solution::Capped(s) => s.eval(t)?,
            Solution::Trig(s) => s.eval(t)?,
        })
    }

    pub fn sigma(&self) -> f64 {
        match self {
            Solution::Discrete(g) => g.sigma,
            Solution::Exp(s) => s.sigma(),
            Solution::Capped(s) => s.sigma(),
            Solution::Trig(s) => s.sigma(),
        }
    }

    pub fn energy(&self) -> f64 {
        match self {
            Solution::Discrete(g) => g.energy,
            Solution::Exp(s) => s.energy(),
            Solution::Capped(s) => s.energy(),
            Solution::Trig(s) => s.energy(),
        }
    }

    fn residual(&self, t: f64) -> f64 {
        match self {
            Solution::Discrete(_) => unreachable!("discrete residuals come from the grid"),
            Solution::Exp(s) => s.residual(t),
            Solution::Capped(s) => s.residual(t),
            Solution::Trig(s) => s.residual(t),
        }
    }
}

/// Solves with the configured method. `auto` takes the closed form whenever
/// the kernel admits one and falls back to the discrete solver otherwise.
pub fn solve_config(config: &RunConfig) -> Result<Solution, CliError> {
    config.validate()?;
    let kernel = config.kernel.build()?;
    let (gamma, horizon) = (config.gamma, config.horizon);
    let discrete = |kernel: Kernel| -> Result<Solution, CliError> {
        Ok(Solution::Discrete(solve(&Problem::new(gamma, horizon, kernel)?, config.cells)?))
    };
    match config.method {
        Method::Discrete => discrete(kernel),
        Method::ExpClosedForm => match &kernel {
            Kernel::ExponentialSum(k) => Ok(Solution::Exp(build_closed_form(k, gamma, horizon)?)),
            _ => unreachable!("validated"),
        },
        Method::CappedLinear => {
            let n = capped_segments(horizon).expect("validated");
            Ok(Solution::Capped(capped_linear_solve(n, gamma)?))
        }
        Method::Trig => match &kernel {
            Kernel::Trigonometric(k) => Ok(Solution::Trig(trig_solve(k.rho(), gamma, horizon)?)),
            _ => unreachable!("validated"),
        },
        Method::Auto => {
            let closed = match (&kernel, &config.kernel) {
                (Kernel::ExponentialSum(k), _) => build_closed_form(k, gamma, horizon).ok().map(Solution::Exp),
                (_, KernelSpec::CappedLinear { cap }) if *cap == 1.0 => capped_segments(horizon)
                    .and_then(|n| capped_linear_solve(n, gamma).ok())
                    .map(Solution::Capped),
                (Kernel::Trigonometric(k), _) => trig_solve(k.rho(), gamma, horizon).ok().map(Solution::Trig),
                _ => None,
            };
            match closed {
                Some(s) => Ok(s),
                None => discrete(kernel),
            }
        }
    }
}

/// Output samples: the cell midpoints for a discrete solution, `cells + 1`
/// nodes including both endpoints for a closed form.
pub fn samples(solution: &Solution, config: &RunConfig) -> Result<Samples, CliError> {
    let s = match solution {
        Solution::Discrete(g) => Samples::midpoints(g.horizon, g.values.clone())?,
        _ => {
            let mut err = None;
            let s = Samples::from_fn_nodes(config.horizon, config.cells + 1, |t| {
                solution.eval(t).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    f64::NAN
                })
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            s
        }
    };
    Ok(s.with_sigma(solution.sigma()))
}

/// One named pass/fail check with the measured quantity and its limit.
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Check { name, value, limit, passed: value <= limit }
    }

    fn json(&self) -> Value {
        json!({"name": self.name, "value": self.value, "limit": self.limit, "passed": self.passed})
    }
}

pub struct Summary {
    pub method: Method,
    pub sigma: f64,
    pub energy: f64,
    pub residual_max: f64,
    pub mass: f64,
    pub report: MonotonicityReport,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn json(&self) -> Value {
        json!({
            "method": self.method.name(),
            "sigma": self.sigma,
            "energy": self.energy,
            "residual_max": self.residual_max,
            "mass": self.mass,
            "report": report_json(&self.report),
            "checks": self.checks.iter().map(Check::json).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

pub fn report_json(r: &MonotonicityReport) -> Value {
    json!({
        "tol": r.tol,
        "symmetry_err": r.symmetry_err,
        "min_value": r.min_value,
        "convexity_defect": r.convexity_defect,
        "diff_orders": r.diff_orders.iter().map(|o| json!({"order": o.order, "min": o.min, "passes": o.passes})).collect::<Vec<_>>(),
        "passed_order": r.passed_order(),
        "symmetric": r.symmetric,
        "nonnegative": r.nonnegative,
        "convex": r.convex,
        "symmetric_totally_monotone": r.symmetric_totally_monotone(),
    })
}

fn closed_mass(solution: &Solution, horizon: f64) -> f64 {
    let mut breaks = vec![0.0];
    if let Solution::Capped(s) = solution {
        breaks.extend((1..s.n()).map(|k| k as f64));
    }
    breaks.push(horizon);
    GaussLegendre::new(20).integrate_piecewise(&breaks, 64, |t| solution.eval(t).unwrap_or(f64::NAN))
}

pub fn summarize(solution: &Solution, config: &RunConfig, max_order: Option<usize>) -> Result<Summary, CliError> {
    let samples = samples(solution, config)?;
    let sigma = solution.sigma();
    let energy = solution.energy();
    let (residual_max, mass, tol, residual_limit, symmetry_limit) = match solution {
        Solution::Discrete(g) => (
            g.residual_max,
            g.mass(),
            discrete_tolerance(g.residual_max, config.gamma),
            DISCRETE_RESIDUAL_TOL,
            DISCRETE_SYMMETRY_TOL,
        ),
        _ => {
            let res = samples.times().into_iter().map(|t| solution.residual(t)).fold(0.0, f64::max);
            (
                res,
                closed_mass(solution, config.horizon),
                closed_form_tolerance(&samples),
                CLOSED_RESIDUAL_TOL,
                CLOSED_SYMMETRY_TOL,
            )
        }
    };
    let tol = config.diagnostics.tol.unwrap_or(tol);
    let max_order = max_order.or(config.diagnostics.max_order).unwrap_or(DEFAULT_MAX_ORDER);
    let report = analyze(&samples, max_order, tol)?;

    let mut checks = vec![
        Check { name: "sigma_positive", value: sigma, limit: 0.0, passed: sigma > 0.0 },
        Check::at_most("sigma_equals_twice_energy", (sigma - 2.0 * energy).abs() / sigma.abs(), SIGMA_TOL),
        Check::at_most("mass", (mass - 1.0).abs(), MASS_TOL),
        Check::at_most("symmetry", report.symmetry_err, symmetry_limit),
        Check::at_most("residual", residual_max / sigma.abs(), residual_limit),
    ];
    for req in &config.diagnostics.require {
        checks.push(match req {
            ShapeCheck::Nonnegative => Check { name: "nonnegative", value: report.min_value, limit: -tol, passed: report.nonnegative },
            ShapeCheck::Convex => Check { name: "convex", value: report.convexity_defect, limit: -tol, passed: report.convex },
            ShapeCheck::TotallyMonotone => Check {
                name: "totally_monotone",
                value: report.passed_order() as f64,
                limit: max_order as f64,
                passed: report.symmetric_totally_monotone(),
            },
        });
    }
    Ok(Summary { method: solution.method(), sigma, energy, residual_max, mass, report, checks })
}
