//! Error types shared by the solver modules.

use thiserror::Error;

/// Errors produced by the forward and inverse solvers.
#[derive(Debug, Error)]
pub enum SlError {
    /// A trajectory left the representable range, or lambda was rejected by
    /// the hyperbolic-regime guard. Callers should rescale or reject lambda.
    #[error("trajectory overflow at lambda = {lambda}: {detail}")]
    Overflow { lambda: f64, detail: String },

    /// A value of lambda was passed where an eigenvalue was required.
    #[error("lambda = {lambda} is not an eigenvalue: |w| = {wronskian:.3e} exceeds tolerance")]
    NotAnEigenvalue { lambda: f64, wronskian: f64 },

    /// The sign-change search for an eigenvalue failed inside its guaranteed
    /// window; usually a symptom of insufficient integration accuracy.
    #[error("no sign change bracketing eigenvalue {index} near lambda = {seed}")]
    BracketFailure { index: usize, seed: f64 },

    /// Two roots appear to share one asymptotic window and the contour count
    /// disagrees with the enumeration.
    #[error("suspected multiple roots near index {index}")]
    MultipleRootSuspect { index: usize },

    /// (-1)^n phi(1, lambda_n) was not positive; the eigenvalue is
    /// mis-indexed or unconverged.
    #[error("sign error in norming constant at index {index}: (-1)^n phi(1) = {value:.3e}")]
    SignError { index: usize, value: f64 },

    /// The counting contour passed too close to a root of the Wronskian.
    #[error("contour |lambda| = {radius} passes through a root (min |w| = {min_abs:.3e})")]
    ContourThroughRoot { radius: f64, min_abs: f64 },

    /// lambda coincides with a pole of the Hadamard product and no
    /// cancellation applies.
    #[error("lambda = {lambda} coincides with a pole of the spectral product")]
    PoleError { lambda: f64 },

    /// The Darboux weight eta became non-positive; the eigenfunction data
    /// feeding the transform is corrupted.
    #[error("Darboux weight eta reached {min_eta:.3e} <= 0 for step (n = {index}, t = {t})")]
    PositivityError { index: usize, t: f64, min_eta: f64 },

    /// Spectral data left the interlacing set.
    #[error("interlacing violated at index {index}: lambda_{index} = {lower} >= lambda_{} = {upper}", index + 1)]
    InterlacingViolation { index: usize, lower: f64, upper: f64 },

    /// Newton iteration did not reach the requested tolerance.
    #[error("no convergence after {iterations} iterations; residual = {residual:.3e}")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A monotone scalar equation could not be bracketed: the supplied data
    /// is inconsistent with the identity being inverted.
    #[error("no bracket for {what}: data inconsistent")]
    NoBracket { what: String },

    /// The argument of a logarithm in a recovery formula was non-positive:
    /// the data lies outside its admissible set.
    #[error("domain error in {what}: log argument = {value:.3e} <= 0")]
    DomainError { what: String, value: f64 },

    /// Malformed input data (file contents, grids, dimensions).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SlError>;
