//! Crate-wide error type.
//!
//! The variants map onto the CLI exit-code contract: input-domain and
//! geometry errors are caller mistakes, analysis/build/optimization errors
//! are reported by the operation that failed, and I/O errors wrap the
//! underlying cause.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's domain (non-finite value, empty
    /// range, out-of-bounds fraction, ...).
    #[error("input domain error: {0}")]
    InputDomain(String),

    /// Paraxial operations reject marginal or unstable resonators instead of
    /// silently returning degenerate mode parameters.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A data-analysis operation could not produce a result (no peaks, fit
    /// divergence, unresolved resonance, ...).
    #[error("analysis error: {0}")]
    Analysis(String),

    /// Simulation-domain construction failed (geometry does not fit,
    /// resolution below floor, probe outside domain, ...).
    #[error("build error: {0}")]
    Build(String),

    /// The coating optimizer found no usable design; carries the best scan
    /// point seen so far as (scale, merit).
    #[error("optimization failed: no scale reached min reflectance > {min_required}; best was R = {best_merit:.6} at s = {best_scale:.6}")]
    OptimizationFailure {
        min_required: f64,
        best_scale: f64,
        best_merit: f64,
    },

    /// File format violations in stack/grid/CSV inputs.
    #[error("format error in {path}: {message}")]
    Format { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::InputDomain(msg.into())
    }

    pub fn analysis(msg: impl Into<String>) -> Self {
        Error::Analysis(msg.into())
    }

    pub fn build(msg: impl Into<String>) -> Self {
        Error::Build(msg.into())
    }
}

/// Returns `Ok(x)` when every element of `values` is finite.
pub fn ensure_finite(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be finite")))
    }
}
