//! JSON run configuration. The schema is documented in `docs/config.md`.

use std::path::{Path, PathBuf};

use fredholm_core::kernel::Kernel;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    ExponentialSum { a: Vec<f64>, b: Vec<f64> },
    CappedLinear { cap: f64 },
    PowerCapped { rho: f64, p: u32 },
    Trigonometric { rho: f64 },
    PowerLaw { alpha: f64, scale: f64 },
    Tabulated { t: Vec<f64>, values: Vec<f64> },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel, CliError> {
        let k = match self {
            KernelSpec::ExponentialSum { a, b } => Kernel::exponential_sum(a.clone(), b.clone()),
            KernelSpec::CappedLinear { cap } => Kernel::capped_linear(*cap),
            KernelSpec::PowerCapped { rho, p } => Kernel::power_capped(*rho, *p),
            KernelSpec::Trigonometric { rho } => Kernel::trigonometric(*rho),
            KernelSpec::PowerLaw { alpha, scale } => Kernel::power_law(*alpha, *scale),
            KernelSpec::Tabulated { t, values } => Kernel::tabulated(t.clone(), values.clone()),
        };
        k.map_err(|e| CliError::validation("kernel", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Discrete,
    ExpClosedForm,
    CappedLinear,
    Trig,
    #[default]
    Auto,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Discrete => "discrete",
            Method::ExpClosedForm => "exp_closed_form",
            Method::CappedLinear => "capped_linear",
            Method::Trig => "trig",
            Method::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Shape checks that may be made to gate the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeCheck {
    Nonnegative,
    Convex,
    TotallyMonotone,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub max_order: Option<usize>,
    /// Absolute tolerance; the default depends on the method.
    pub tol: Option<f64>,
    #[serde(default)]
    pub require: Vec<ShapeCheck>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

pub const DEFAULT_CELLS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelSpec,
    pub gamma: f64,
    pub horizon: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Strictly decreasing list used by `sweep`.
    #[serde(default)]
    pub gammas: Vec<f64>,
}

fn default_cells() -> usize {
    DEFAULT_CELLS
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, &e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(path, &e))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(CliError::validation("gamma", format!("must be positive, got {}", self.gamma)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(CliError::validation("horizon", format!("must be positive, got {}", self.horizon)));
        }
        if self.cells < 2 {
            return Err(CliError::validation("cells", format!("need at least 2, got {}", self.cells)));
        }
        if let Some(tol) = self.diagnostics.tol {
            if !(tol >= 0.0) {
                return Err(CliError::validation("diagnostics.tol", format!("must be nonnegative, got {tol}")));
            }
        }
        self.kernel.build()?;
        let incompatible = |need: &str| {
            CliError::validation("method", format!("{} requires {need}", self.method.name()))
        };
        match (self.method, &self.kernel) {
            (Method::ExpClosedForm, KernelSpec::ExponentialSum { .. }) => {}
            (Method::ExpClosedForm, _) => return Err(incompatible("an exponential_sum kernel")),
            (Method::CappedLinear, KernelSpec::CappedLinear { cap }) => {
                if *cap != 1.0 {
                    return Err(incompatible("cap = 1"));
                }
                if capped_segments(self.horizon).is_none() {
                    return Err(incompatible("an integer horizon"));
                }
            }
            (Method::CappedLinear, _) => return Err(incompatible("a capped_linear kernel")),
            (Method::Trig, KernelSpec::Trigonometric { .. }) => {}
            (Method::Trig, _) => return Err(incompatible("a trigonometric kernel")),
            _ => {}
        }
        Ok(())
    }
}

/// `Some(n)` when the horizon is the positive integer `n`.
pub fn capped_segments(horizon: f64) -> Option<usize> {
    (horizon >= 1.0 && horizon.fract() == 0.0 && horizon < 1e6).then_some(horizon as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(r#"{"kernel": {"type": "trigonometric", "rho": 0.5}, "gamma": 0.001, "horizon": 1}"#);
        assert_eq!(c.method, Method::Auto);
        assert_eq!(c.cells, DEFAULT_CELLS);
        assert!(c.diagnostics.require.is_empty());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = r#"{"kernel": {"type": "capped_linear", "cap": 1, "slope": 2}, "gamma": 1, "horizon": 1}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
        let bad = r#"{"kernel": {"type": "capped_linear", "cap": 1}, "gamma": 1, "horizon": 1, "cell": 4}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
    }

    #[test]
    fn method_must_fit_kernel() {
        let mut c = parse(r#"{"kernel": {"type": "capped_linear", "cap": 1}, "gamma": 0.1, "horizon": 3, "method": "capped_linear"}"#);
        c.validate().unwrap();
        c.horizon = 2.5;
        assert!(c.validate().is_err());
        c.horizon = 3.0;
        c.kernel = KernelSpec::CappedLinear { cap: 2.0 };
        assert!(c.validate().is_err());
        c.method = Method::Trig;
        assert!(c.validate().is_err());
        c.method = Method::Discrete;
        c.validate().unwrap();
    }

    #[test]
    fn kernel_spec_round_trips() {
        let spec = KernelSpec::PowerCapped { rho: 10.0, p: 4 };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"type":"power_capped","rho":10.0,"p":4}"#);
        assert_eq!(serde_json::from_str::<KernelSpec>(&text).unwrap(), spec);
    }
}
