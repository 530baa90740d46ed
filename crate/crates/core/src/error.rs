//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// NaN or infinite value where a finite number is required.
    #[error("non-finite value for {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },

    /// A value fell outside its admissible interval.
    #[error("{what} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Barycentric components must sum to one.
    #[error("barycentric coordinates sum to {sum}, expected 1 within {tol}")]
    BarycentricSum { sum: f64, tol: f64 },

    /// A point was required to lie in the closed strongly-local tetrahedron.
    #[error(
        "point ({x}, {y}, {z}) is outside the closed tetrahedron; \
         facet margins ({m1:.6}, {m2:.6}, {m3:.6}, {m4:.6})"
    )]
    OutsideTetrahedron {
        x: f64,
        y: f64,
        z: f64,
        m1: f64,
        m2: f64,
        m3: f64,
        m4: f64,
    },

    /// The nested-region invariant failed beyond tolerance. This signals a
    /// bug in the membership tests, never an expected outcome.
    #[error("region hierarchy violated at ({x}, {y}, {z}): {detail}")]
    HierarchyViolation {
        x: f64,
        y: f64,
        z: f64,
        detail: String,
    },

    /// A correlator expansion produced a negative probability.
    #[error(
        "correlator expansion infeasible: P(a1={a1:+}, a2={a2:+} | q1={q1}, q2={q2}) = {value}"
    )]
    InfeasibleExpansion {
        q1: usize,
        q2: usize,
        a1: i8,
        a2: i8,
        value: f64,
    },

    /// Mixed moments disagree between a setting pair and its transpose.
    #[error(
        "behavior is not exchange-symmetric: M[{q1}][{q2}] = {forward} but \
         M[{q2}][{q1}] = {reverse} (tolerance {tol})"
    )]
    MomentAsymmetry {
        q1: usize,
        q2: usize,
        forward: f64,
        reverse: f64,
        tol: f64,
    },

    /// Hidden-variable model weights must form a probability distribution.
    #[error("model weights sum to {sum}, expected 1 within 1e-9")]
    WeightsNotNormalized { sum: f64 },

    #[error("model weight {index} is negative: {value}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("model has {weights} weights but {responses} response triples")]
    ModelLengthMismatch { weights: usize, responses: usize },

    #[error("model must have at least one hidden-variable value")]
    EmptyModel,

    /// Setting-pair distribution for event generation is unusable.
    #[error("invalid setting policy: {reason}")]
    InvalidPolicy { reason: String },

    /// Moment estimation needs at least one event in every off-diagonal class.
    #[error("no events for setting class {{{class}}}; cannot estimate that moment")]
    EmptyClass { class: &'static str },

    #[error("significance level alpha = {alpha} must lie strictly between 0 and 1")]
    InvalidAlpha { alpha: f64 },

    /// Structured-document parse failure (behavior or model files).
    #[error("cannot parse {what}: {reason}")]
    Parse { what: &'static str, reason: String },

    /// Event-file parse failure with the offending line number (1-based).
    #[error("event file line {line}: {reason}")]
    EventParse { line: usize, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
