//! Error type shared across the engine.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (jet order out of range, bad sample count, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid catalog parameters or a failed construction probe.
    #[error("construction error: {0}")]
    Construction(String),

    /// Division (or reciprocal) of a jet whose constant term vanishes.
    #[error("division by a jet with zero constant term")]
    JetDivisionByZero,

    /// Square root of a jet whose constant term is not strictly positive.
    #[error("sqrt of a jet with non-positive constant term ({0})")]
    JetSqrtDomain(f64),

    /// Requested a partial derivative beyond the carried truncation order.
    #[error("partial ({i},{j}) exceeds jet order {order}")]
    PartialOutOfOrder { i: usize, j: usize, order: usize },

    /// Parameter point outside the patch domain or inside an excluded zone.
    #[error("point ({u}, {v}) is not admissible: {reason}")]
    Inadmissible { u: f64, v: f64, reason: String },

    /// The immersion is singular: |x_u x x_v| below the regularity floor.
    #[error("singular immersion at ({u}, {v}): |x_u x x_v| = {cross_norm:.3e}")]
    Regularity { u: f64, v: f64, cross_norm: f64 },

    /// Gaussian curvature magnitude below the configured floor.
    #[error("flat point at ({u}, {v}): |K| = {k:.3e} below k_min = {k_min:.3e}")]
    FlatPoint { u: f64, v: f64, k: f64, k_min: f64 },

    /// The selected fundamental form is not invertible at the point.
    #[error("form {form} is singular at ({u}, {v}): det = {det:.3e}")]
    SingularForm {
        form: &'static str,
        u: f64,
        v: f64,
        det: f64,
    },

    /// The ruling invariant (mixed product of directrix/ruling frame) vanishes.
    #[error("degenerate ruling at s = {s}: invariant A = {a:.3e} vanishes")]
    DegenerateRuling { s: f64, a: f64 },

    /// Could not collect enough admissible sample points.
    #[error("sampling failed: {0}")]
    Sampling(String),

    /// Least-squares design matrix too ill-conditioned to trust a verdict.
    #[error("ill-posed fit: design matrix condition number {condition:.3e}")]
    IllPosedFit { condition: f64 },

    /// An internal consistency check failed; indicates an engine bug.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}
