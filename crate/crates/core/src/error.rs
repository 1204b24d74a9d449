use thiserror::Error;

use crate::field::Point2;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Each variant maps to a stable machine-readable code (see [`Error::code`]),
/// which the command line front end writes into its JSON output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("point ({}, {}) lies outside the field domain", .0.x, .0.y)]
    OutOfDomain(Point2),

    #[error("not differentiable at ({}, {}): {reason}", .point.x, .point.y)]
    NonDifferentiablePoint { point: Point2, reason: String },

    #[error("light-like point at ({}, {}) (B = {b:e})", .point.x, .point.y)]
    LightLikePoint { point: Point2, b: f64 },

    #[error("sonic point at ({}, {}) (B = {b:e})", .point.x, .point.y)]
    SonicPoint { point: Point2, b: f64 },

    #[error("causal type at ({}, {}) does not match epsilon = {epsilon} (B = {b:e})", .point.x, .point.y)]
    CausalMismatch { point: Point2, b: f64, epsilon: i8 },

    #[error("degenerate denominator at ({}, {}): |grad|^2 + epsilon = {value:e}", .point.x, .point.y)]
    DegenerateDenominator { point: Point2, value: f64 },

    #[error("one-form is not exact: path-independence defect {defect:e} exceeds {threshold:e}")]
    NonExactForm { defect: f64, threshold: f64 },

    #[error("quadrature did not converge on segment [{a}, {b}] after {subintervals} subintervals")]
    QuadratureFailure { a: f64, b: f64, subintervals: usize },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("g' vanishes near x = {x}")]
    DividesByZeroDerivative { x: f64 },

    #[error("parameter domain violation: {0}")]
    DomainViolation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no convergence after {iterations} Newton iterations (residual {last_residual:e}){}", if *.stalled { ", line search stalled" } else { "" })]
    MaxIterations { iterations: usize, last_residual: f64, stalled: bool },

    #[error("linear solve failed after {iterations} iterations (relative residual {relative_residual:e})")]
    LinearSolveFailure { iterations: usize, relative_residual: f64 },

    #[error("loss of ellipticity at iteration {iteration}: discrete B = {min_b:e} at node ({i}, {j})")]
    CausalTypeViolation { iteration: usize, min_b: f64, i: usize, j: usize, last_residual: f64 },
}

impl Error {
    /// Stable identifier for machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax_error",
            Error::UnboundParameter(_) => "unbound_parameter",
            Error::OutOfDomain(_) => "out_of_domain",
            Error::NonDifferentiablePoint { .. } => "non_differentiable_point",
            Error::LightLikePoint { .. } => "light_like_point",
            Error::SonicPoint { .. } => "sonic_point",
            Error::CausalMismatch { .. } => "causal_mismatch",
            Error::DegenerateDenominator { .. } => "degenerate_denominator",
            Error::NonExactForm { .. } => "non_exact_form",
            Error::QuadratureFailure { .. } => "quadrature_failure",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::DividesByZeroDerivative { .. } => "divides_by_zero_derivative",
            Error::DomainViolation(_) => "domain_violation",
            Error::InvalidInput(_) => "invalid_input",
            Error::MaxIterations { .. } => "max_iterations",
            Error::LinearSolveFailure { .. } => "linear_solve_failure",
            Error::CausalTypeViolation { .. } => "causal_type_violation",
        }
    }

    /// Residual carried by solver failures, if any.
    pub fn last_residual(&self) -> Option<f64> {
        match self {
            Error::MaxIterations { last_residual, .. } | Error::CausalTypeViolation { last_residual, .. } => {
                Some(*last_residual)
            }
            _ => None,
        }
    }
}
