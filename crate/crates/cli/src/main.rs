// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fredholm_core::diagnostics::{compare, Samples};
use fredholm_core::discrete::{gamma_sweep, Problem};
use fredholm_core::expo::verify_step_identities;
use fredholm_core::kernel::Kernel;
use serde_json::{json, Value};

use config::{Format, Method, RunConfig};
use error::CliError;
use output::{pretty, write};

#[derive(Parser)]
#[command(name = "fredholm", version, about = "Minimise the quadratic impact energy and check the shape of the minimiser")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Where to write results; stdout carries only the summary.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides `cells` in the config.
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    max_order: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and run the shape diagnostics.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Resample two solutions on a common midpoint grid and report their
    /// differences.
    Compare {
        /// Exactly two configs.
        #[arg(long, num_args = 1, required = true)]
        config: Vec<PathBuf>,
        /// Midpoint count of the common grid; defaults to the cells of the
        /// first discrete solution, else the first config's cells.
        #[arg(long)]
        grid_points: Option<usize>,
        /// Fail when `max_abs` exceeds this.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Discrete solves over a strictly decreasing list of gammas.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated; overrides `gammas` in the config.
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the matrix identities behind the exponential closed form.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: &Path, common: &Common) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::load(path)?;
    if let Some(c) = common.cells {
        config.cells = c;
    }
    if let Some(k) = common.max_order {
        config.diagnostics.max_order = Some(k);
    }
    if common.out.is_some() {
        config.output.path = common.out.clone();
    }
    if common.format.is_some() {
        config.output.format = common.format;
    }
    config.validate()?;
    Ok(config)
}

/// Prints `value`, and also writes it to `out` when given.
fn emit_json(out: Option<&Path>, value: &Value) -> Result<(), CliError> {
    if let Some(path) = out {
        write(path, &pretty(value))?;
    }
    print!("{}", pretty(value));
    Ok(())
}

fn cmd_solve(config: RunConfig) -> Result<bool, CliError> {
    let solution = run::solve_config(&config)?;
    let summary = run::summarize(&solution, &config, None)?;
    let samples = run::samples(&solution, &config)?;
    if let Some(path) = &config.output.path {
        let text = match config.output.format.unwrap_or_default() {
            Format::Csv => output::solution_csv(&config, &solution, &samples),
            Format::Json => pretty(&output::solution_json(&config, &summary, &samples)),
        };
        write(path, &text)?;
    }
    print!("{}", pretty(&summary.json()));
    Ok(summary.passed())
}

// compare and verify ignore `output` in the configs: those paths name
// solution files.
fn cmd_compare(
    configs: Vec<RunConfig>,
    grid_points: Option<usize>,
    tol: Option<f64>,
    out: Option<&Path>,
) -> Result<bool, CliError> {
    let [a, b]: [RunConfig; 2] =
        configs.try_into().map_err(|c: Vec<_>| CliError::usage(format!("compare takes two configs, got {}", c.len())))?;
    let horizon = a.horizon;
    if (a.horizon - b.horizon).abs() > 1e-12 * horizon {
        return Err(CliError::validation("horizon", format!("horizons differ: {} vs {}", a.horizon, b.horizon)));
    }
    let sa = run::solve_config(&a)?;
    let sb = run::solve_config(&b)?;
    let points = grid_points
        .or_else(|| [(&sa, &a), (&sb, &b)].iter().find(|(s, _)| s.is_discrete()).map(|(_, c)| c.cells))
        .unwrap_or(a.cells);
    if points < 1 {
        return Err(CliError::validation("grid_points", "must be positive"));
    }
    let resample = |s: &run::Solution| -> Result<Samples, CliError> {
        let h = horizon / points as f64;
        let values = (0..points).map(|k| s.eval((k as f64 + 0.5) * h)).collect::<Result<Vec<_>, _>>()?;
        Ok(Samples::midpoints(horizon, values)?.with_sigma(s.sigma()))
    };
    let c = compare(&resample(&sa)?, &resample(&sb)?)?;
    let passed = tol.is_none_or(|t| c.max_abs <= t);
    let value = json!({
        "grid_points": points,
        "horizon": horizon,
        "a": {"method": sa.method().name(), "sigma": sa.sigma()},
        "b": {"method": sb.method().name(), "sigma": sb.sigma()},
        "max_abs": c.max_abs,
        "l2": c.l2,
        "sigma_rel_diff": c.sigma_rel_diff,
        "tol": tol,
        "passed": passed,
    });
    emit_json(out, &value)?;
    Ok(passed)
}

fn cmd_sweep(mut config: RunConfig, gammas: Option<Vec<f64>>) -> Result<bool, CliError> {
    if let Some(g) = gammas {
        config.gammas = g;
    }
    let problem = Problem::new(config.gamma, config.horizon, config.kernel.build()?)?;
    let grids = gamma_sweep(&problem, config.cells, &config.gammas)?;
    let mut entries = Vec::new();
    let mut csv = String::from("gamma,sigma,energy,residual_max,min_value,convexity_defect,passed_order\n");
    let mut all = true;
    for (gamma, grid) in config.gammas.clone().into_iter().zip(grids) {
        let entry_config = RunConfig { gamma, method: Method::Discrete, ..config.clone() };
        let summary = run::summarize(&run::Solution::Discrete(grid), &entry_config, None)?;
        all &= summary.passed();
        let r = &summary.report;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            output::num(gamma),
            output::num(summary.sigma),
            output::num(summary.energy),
            output::num(summary.residual_max),
            output::num(r.min_value),
            output::num(r.convexity_defect),
            r.passed_order()
        ));
        let mut v = summary.json();
        v["gamma"] = json!(gamma);
        entries.push(v);
    }
    let value = json!({"cells": config.cells, "entries": entries, "passed": all});
    match (config.output.format.unwrap_or_default(), &config.output.path) {
        (Format::Csv, Some(path)) => {
            write(path, &csv)?;
            print!("{}", pretty(&value));
        }
        (_, path) => emit_json(path.as_deref(), &value)?,
    }
    Ok(all)
}

fn cmd_verify(config: RunConfig, out: Option<&Path>) -> Result<bool, CliError> {
    let kernel = match config.kernel.build()? {
        Kernel::ExponentialSum(k) => k,
        _ => return Err(CliError::validation("kernel", "verify requires an exponential_sum kernel")),
    };
    let r = verify_step_identities(&kernel, config.gamma, config.horizon)?;
    let value = json!({
        "cauchy_identity_err": r.cauchy_identity_err,
        "cauchy_vs_lu_err": r.cauchy_vs_lu_err,
        "d1_row_sum_err": r.d1_row_sum_err,
        "d1_min": r.d1_min,
        "d2_min": r.d2_min,
        "column_sum_err": r.column_sum_err,
        "n2_inverse_max_offdiag": r.n2_inverse_max_offdiag,
        "u_min_diagonal": r.u_min_diagonal,
        "weights_min": r.weights_min,
        "factorization_err": r.factorization_err,
        "reconstruction_err": r.reconstruction_err,
        "checks": {
            "cauchy_inverse": r.cauchy_inverse_ok(),
            "column_sums": r.column_sums_ok(),
            "z_matrix": r.z_matrix_ok(),
            "nonnegativity": r.nonnegativity_ok(),
            "reconstruction": r.reconstruction_ok(),
        },
        "passed": r.all_ok(),
    });
    emit_json(out, &value)?;
    Ok(r.all_ok())
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Solve { config, common } => cmd_solve(load(&config, &common)?),
        Command::Compare { config, grid_points, tol, common } => {
            let configs = config.iter().map(|p| load(p, &common)).collect::<Result<Vec<_>, _>>()?;
            cmd_compare(configs, grid_points, tol, common.out.as_deref())
        }
        Command::Sweep { config, gammas, common } => cmd_sweep(load(&config, &common)?, gammas),
        Command::Verify { config, common } => cmd_verify(load(&config, &common)?, common.out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", CliError::usage(message.trim_end()));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
