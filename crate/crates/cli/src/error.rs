use std::fmt;
use std::path::Path;

use serde_json::{json, Value};

/// Anything that ends a run early. Printed to stderr as
/// `{"error": ..., "detail": {...}}`.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub detail: Value,
}

impl CliError {
    pub fn io(path: &Path, e: &std::io::Error) -> Self {
        CliError { kind: "io", detail: json!({"path": path.display().to_string(), "message": e.to_string()}) }
    }

    pub fn config(path: &Path, e: &serde_json::Error) -> Self {
        CliError {
            kind: "config",
            detail: json!({
                "path": path.display().to_string(),
                "line": e.line(),
                "column": e.column(),
                "message": e.to_string(),
            }),
        }
    }

    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        CliError { kind: "validation", detail: json!({"field": field, "message": message.into()}) }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError { kind: "usage", detail: json!({"message": message.into()}) }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": self.kind, "detail": self.detail})
    }
}

impl From<fredholm_core::Error> for CliError {
    fn from(e: fredholm_core::Error) -> Self {
        use fredholm_core::Error as E;
        let variant = match &e {
            E::InvalidKernel(_) => "invalid_kernel",
            E::InvalidParameter(_) => "invalid_parameter",
            E::Domain { .. } => "domain",
            E::NotPositiveType { .. } => "not_positive_type",
            E::IllConditioned { .. } => "ill_conditioned",
            E::NegativeCoefficient { .. } => "negative_coefficient",
            E::TrigPole { .. } => "trig_pole",
            E::GridTooCoarse { .. } => "grid_too_coarse",
            E::GridMismatch => "grid_mismatch",
            E::Overflow { .. } => "overflow",
        };
        CliError { kind: "solver", detail: json!({"variant": variant, "message": e.to_string()}) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}
