use num_complex::Complex64;
use thiserror::Error;

use crate::qspecial::CqEstimate;

/// Errors raised by the library.
#[derive(Debug, Clone, Error)]
pub enum QError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("window error: {0}")]
    Window(String),

    #[error("zero-limit extrapolation did not converge: {0}")]
    Extrapolation(String),

    /// Cancellation in an alternating series exceeded what the current
    /// precision can absorb.
    #[error("precision budget exceeded (cancellation {cancellation:.3e}): {detail}")]
    Precision { cancellation: f64, detail: String },

    #[error("value outside double range: {0}")]
    Range(String),

    /// A windowed sum whose tail does not die out. The partial sums are kept
    /// so the caller can inspect the growth.
    #[error("tail divergence: {detail}")]
    Divergence {
        detail: String,
        partial: Complex64,
        partial_sums: Vec<Complex64>,
    },

    #[error("unresolved spectral weight: {0}")]
    Resolution(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("calibration failed: relative residual {relative_residual:.3e} above {threshold:.1e}")]
    Calibration {
        relative_residual: f64,
        threshold: f64,
        report: Box<CqEstimate>,
    },
}

pub type Result<T> = std::result::Result<T, QError>;
