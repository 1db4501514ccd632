use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures reported by the solvers and kernel constructors.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Kernel parameters violate the family's invariants.
    InvalidKernel(String),
    /// A problem or configuration parameter is out of range.
    InvalidParameter(String),
    /// A point lies outside the domain of the function being evaluated.
    Domain { what: &'static str, value: f64 },
    /// The discretized quadratic form lost positive definiteness.
    NotPositiveType { index: usize, pivot: f64 },
    /// A small dense system was singular or too ill-conditioned to trust.
    IllConditioned { condition: f64 },
    /// A closed-form coefficient came out negative beyond rounding.
    NegativeCoefficient { index: usize, value: f64 },
    /// The trigonometric closed form hits a pole of `tan(rho*T/2)`.
    TrigPole { half_angle: f64 },
    /// A sampled grid is too small for the requested difference order.
    GridTooCoarse { required: usize, actual: usize },
    /// Two sampled solutions do not share a grid.
    GridMismatch,
    /// An exponent would overflow `f64`.
    Overflow { exponent: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidKernel(msg) => write!(f, "invalid kernel: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::NotPositiveType { index, pivot } => write!(
                f,
                "kernel not of positive type at this resolution (pivot {pivot:e} at index {index})"
            ),
            Error::IllConditioned { condition } => {
                write!(f, "closed-form system ill-conditioned (condition estimate {condition:e})")
            }
            Error::NegativeCoefficient { index, value } => {
                write!(f, "closed-form coefficient z[{index}] = {value:e} is negative")
            }
            Error::TrigPole { half_angle } => write!(
                f,
                "trig solution singular at rho*T/2 = {half_angle} (close to pi/2 + k*pi)"
            ),
            Error::GridTooCoarse { required, actual } => {
                write!(f, "grid too coarse: need at least {required} samples, got {actual}")
            }
            Error::GridMismatch => f.write_str("sampled solutions are on different grids"),
            Error::Overflow { exponent } => {
                write!(f, "exponent {exponent} overflows double precision")
            }
        }
    }
}

impl core::error::Error for Error {}
