//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by construction, solving and verification routines.
#[derive(Debug, Error)]
pub enum CymError {
    /// A spec or argument failed validation before any computation ran.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// Coefficient reversal requested with a degree bound below the actual degree.
    #[error("invalid degree bound {bound} for polynomial of degree {degree}")]
    InvalidDegree { bound: usize, degree: usize },

    /// A synthetic division that must be exact left a remainder above tolerance.
    #[error("factorization failure: remainder {remainder:.3e} exceeds {tolerance:.3e} ({context})")]
    FactorizationFailure {
        remainder: f64,
        tolerance: f64,
        context: String,
    },

    /// The profile ODE integrator could not reach r = 0.
    #[error("profile solver failure at r = {r:.6e}, W = {w:.6e}: {detail}")]
    SolverFailure { r: f64, w: f64, detail: String },

    /// The de-singularized right-hand side hit a vanishing denominator.
    #[error("near-singular denominator h(Z) = {value:.3e} at r = {r:.6e}")]
    NearSingularDenominator { r: f64, value: f64 },

    /// Evaluation requested outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quantity with a known sign came out with the wrong sign.
    #[error("sign violation: {0}")]
    SignViolation(String),

    /// A division overflowed (profile approaching its boundary zero).
    #[error("overflow: {0}")]
    Overflow(String),

    /// An operation was invoked outside its stated precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two redundant criteria that must agree did not.
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    /// A supplied bundle metric is not Hermitian positive definite where queried.
    #[error("metric error: {0}")]
    Metric(String),

    /// The determinant potential does not induce a positive-definite base metric.
    #[error("bundle is not negative: {0}")]
    NotNegativeBundle(String),

    /// Direct sums of metrics over different bases or domains.
    #[error("composition error: {0}")]
    Composition(String),

    /// The verified Kähler form failed positivity where the theory requires it.
    #[error("geometry violation: {0}")]
    GeometryViolation(String),

    /// Requested a case the artifact deliberately does not cover.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A function evaluation produced NaN or infinity.
    #[error("evaluation error: {0}")]
    Evaluation(String),
}

pub type Result<T> = std::result::Result<T, CymError>;
