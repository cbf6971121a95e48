use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

/// Errors produced by the analysis and simulation kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidInput(String),
    /// Matrix or signal dimensions do not line up.
    DimensionMismatch(String),
    /// A rational function was evaluated at (or numerically on top of) a pole.
    PoleEvaluation { s: Complex64 },
    /// `forward / (1 + forward * feedback)` has an identically zero denominator.
    DegenerateLoop,
    /// A realization was requested for a transfer function with more zeros than poles.
    Improper { relative_degree: i64 },
    /// `Q / Gn` is not proper, so the observer cannot be realized causally.
    Causality { relative_degree: i64 },
    /// The plant model cannot be formed for the given parameters.
    SingularModel(String),
    /// Closed-loop denominator magnitude fell below the evaluation floor.
    NearSingular { omega: f64, magnitude: f64 },
    /// Block interconnection contains a loop of direct-feedthrough paths only.
    AlgebraicLoop,
    /// Negative delay passed to a delay line.
    NegativeDelay(f64),
    /// Integration produced a non-finite value.
    Divergence { step: usize, last_state: Vec<f64> },
    /// The shifted-QR eigenvalue iteration did not converge.
    EigenNoConvergence,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::PoleEvaluation { s } => {
                write!(
                    f,
                    "transfer function evaluated at a pole (s = {} + {}j)",
                    s.re, s.im
                )
            }
            Error::DegenerateLoop => write!(f, "feedback loop has an identically zero denominator"),
            Error::Improper { relative_degree } => {
                write!(
                    f,
                    "improper transfer function (relative degree {relative_degree})"
                )
            }
            Error::Causality { relative_degree } => write!(
                f,
                "Q/Gn is improper (relative degree {relative_degree}); raise the Q filter order"
            ),
            Error::SingularModel(msg) => write!(f, "singular plant model: {msg}"),
            Error::NearSingular { omega, magnitude } => write!(
                f,
                "closed-loop denominator |{magnitude:e}| is numerically zero at omega = {omega}"
            ),
            Error::AlgebraicLoop => {
                write!(
                    f,
                    "algebraic loop: no strictly proper element breaks the feedback path"
                )
            }
            Error::NegativeDelay(t) => write!(f, "delay must be non-negative, got {t}"),
            Error::Divergence { step, .. } => {
                write!(f, "simulation diverged (non-finite state) at step {step}")
            }
            Error::EigenNoConvergence => write!(f, "eigenvalue iteration did not converge"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
