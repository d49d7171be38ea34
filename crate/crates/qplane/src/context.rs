use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};

/// Arithmetic used for series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    /// IEEE double, failing over to software floats when cancellation is severe.
    Double,
    /// Software floats throughout.
    Extended,
}

impl std::str::FromStr for PrecisionMode {
    type Err = QError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(PrecisionMode::Double),
            "extended" => Ok(PrecisionMode::Extended),
            other => Err(QError::InvalidParameter(format!(
                "precision mode must be `double` or `extended`, got `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for PrecisionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PrecisionMode::Double => "double",
            PrecisionMode::Extended => "extended",
        })
    }
}

/// Deformation parameter together with the numeric policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QContext {
    q: f64,
    precision: PrecisionMode,
    series_tol: f64,
    max_terms: usize,
    failover: bool,
}

/// Cancellation ratio above which a double evaluation is abandoned.
pub const CANCELLATION_BUDGET: f64 = 1e6;

impl QContext {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QError::InvalidParameter(format!(
                "q must lie in (0, 1), got {q}"
            )));
        }
        Ok(QContext {
            q,
            precision: PrecisionMode::Double,
            series_tol: 1e-16,
            max_terms: 100_000,
            failover: true,
        })
    }

    pub fn with_precision(mut self, mode: PrecisionMode) -> Self {
        self.precision = mode;
        self
    }

    pub fn with_series_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(QError::InvalidParameter(format!(
                "series_tol must be positive, got {tol}"
            )));
        }
        self.series_tol = tol;
        Ok(self)
    }

    pub fn with_max_terms(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QError::InvalidParameter(
                "max_terms must be at least 1".into(),
            ));
        }
        self.max_terms = n;
        Ok(self)
    }

    /// Whether double evaluations may silently switch to software floats.
    /// With failover disabled a precision error is returned instead.
    pub fn with_failover(mut self, on: bool) -> Self {
        self.failover = on;
        self
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn q2(&self) -> f64 {
        self.q * self.q
    }

    pub fn ln_q(&self) -> f64 {
        self.q.ln()
    }

    pub fn precision(&self) -> PrecisionMode {
        self.precision
    }

    pub fn series_tol(&self) -> f64 {
        self.series_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn failover(&self) -> bool {
        self.failover
    }

    /// Scale of the lattice on which 𝒥 decays: `a = 1/(q⁻¹ − q)`.
    ///
    /// The Hahn–Exton zeros and the orthogonality relations live on
    /// `x ∈ a·q^ℤ`, not on `q^ℤ`.
    pub fn bessel_scale(&self) -> f64 {
        self.q / (1.0 - self.q2())
    }

    /// `(q − q⁻¹)/(2q ln q)`, the prefactor of the logarithmic part of 𝒩.
    pub fn log_prefactor(&self) -> f64 {
        let q = self.q;
        (q - 1.0 / q) / (2.0 * q * q.ln())
    }

    /// `(2q ln q)/(q − q⁻¹)`, the strength of the delta produced by `□ log ρ`.
    pub fn delta_factor(&self) -> f64 {
        1.0 / self.log_prefactor()
    }

    /// Integer power of q built by repeated multiplication from 1, so that
    /// `qpow(k+1) == qpow(k) * q` bit for bit for k ≥ 0 (and with q⁻¹ below 0).
    pub fn qpow(&self, k: i64) -> f64 {
        let (step, n) = if k >= 0 {
            (self.q, k)
        } else {
            (1.0 / self.q, -k)
        };
        let mut v = 1.0;
        for _ in 0..n {
            v *= step;
        }
        v
    }
}
