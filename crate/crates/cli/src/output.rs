//! File formats. Floats in CSV use 17 significant digits so repeated runs
//! are byte-identical and values round-trip.

use std::fmt::Write as _;
use std::path::Path;

use fredholm_core::diagnostics::Samples;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::{Solution, Summary};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn solution_csv(config: &RunConfig, solution: &Solution, samples: &Samples) -> String {
    let mut out = String::new();
    let kernel = serde_json::to_string(&config.kernel).expect("kernel spec serializes");
    writeln!(out, "# kernel: {kernel}").unwrap();
    writeln!(out, "# gamma: {}", num(config.gamma)).unwrap();
    writeln!(out, "# horizon: {}", num(config.horizon)).unwrap();
    writeln!(out, "# method: {}", solution.method().name()).unwrap();
    writeln!(out, "# sigma: {}", num(solution.sigma())).unwrap();
    writeln!(out, "# energy: {}", num(solution.energy())).unwrap();
    out.push_str("t,phi\n");
    for (t, v) in samples.times().iter().zip(samples.values()) {
        writeln!(out, "{},{}", num(*t), num(*v)).unwrap();
    }
    out
}

pub fn solution_json(config: &RunConfig, summary: &Summary, samples: &Samples) -> Value {
    json!({
        "kernel": config.kernel,
        "gamma": config.gamma,
        "horizon": config.horizon,
        "summary": summary.json(),
        "t": samples.times(),
        "phi": samples.values(),
    })
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, &e))
}
