use alloc::string::String;
use core::fmt;

/// Errors surfaced by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A spec, field or argument failed validation.
    Invalid(String),
    /// Adaptive quadrature hit its depth limit before reaching the requested tolerance.
    Quadrature { requested: f64, achieved: f64 },
    /// Bisection bracket could not be expanded to enclose the target.
    Bracket(String),
    /// Operation needs a nonzero function (quotients, residuals).
    ZeroFunction(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::Quadrature {
                requested,
                achieved,
            } => write!(
                f,
                "quadrature did not converge: requested tolerance {requested:e}, achieved {achieved:e}"
            ),
            Error::Bracket(msg) => write!(f, "bracket expansion failed: {msg}"),
            Error::ZeroFunction(what) => write!(f, "{what}"),
        }
    }
}

impl core::error::Error for Error {}
