//! Hahn–Exton q-Bessel functions, the q-Neumann function, the Green
//! function `𝒢 = 𝒩 − i𝒥` and its spectral representation.
//!
//! All series share one engine ([`Argument`] describes where to evaluate).
//! In [`PrecisionMode::Double`] a double summation is tried first and
//! abandoned for software floats when its cancellation ratio exceeds
//! [`CANCELLATION_BUDGET`].

mod fourier;
mod residual;
mod series;
mod spectral;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::context::{PrecisionMode, QContext, CANCELLATION_BUDGET};
use crate::error::{QError, Result};

pub use fourier::{
    fourier_bessel_entry, fourier_bessel_literal_entry, fourier_bessel_matrix, BesselTable,
};
pub use residual::{helmholtz_residuals, ResidualPoint, Solution};
pub use series::{Argument, ExtSeries, MIN_EXT_BITS, UNDERFLOW_LOG2};
pub use spectral::{
    estimate_c_q, spectral_green, CqEstimate, CqPoint, SpectralEvalParams, SpectralLattice,
};

use series::{sum_double, sum_ext, Kind};

/// A summed series with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: Complex64,
    pub terms_used: usize,
    /// Largest partial sum (or term) over the magnitude of the result.
    pub cancellation_magnitude: f64,
    pub error_bound: f64,
    /// Whether software floats were used.
    pub extended: bool,
}

/// Spectral parameter and Neumann constant of a Green function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenParams {
    pub p: f64,
    pub c_q: f64,
    /// `p = q^(2t)` for some integer `t`.
    pub on_lattice: bool,
}

/// Tolerance on `log_(q²) p` being an integer.
const LATTICE_TOL: f64 = 1e-9;

fn near_integer(v: f64) -> bool {
    (v - v.round()).abs() <= LATTICE_TOL
}

impl GreenParams {
    pub fn new(ctx: &QContext, p: f64, c_q: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(QError::InvalidParameter(format!(
                "spectral parameter p must be positive, got {p}"
            )));
        }
        if !c_q.is_finite() {
            return Err(QError::InvalidParameter("c_q must be finite".into()));
        }
        let on_lattice = near_integer(p.ln() / ctx.q2().ln());
        Ok(GreenParams { p, c_q, on_lattice })
    }

    /// `p` sits on the point spectrum `a²·q^(2ℤ)` of the radial operator,
    /// where the spectral sum has a pole.
    pub fn resonant(&self, ctx: &QContext) -> bool {
        let a = ctx.bessel_scale();
        near_integer((self.p / (a * a)).ln() / ctx.q2().ln())
    }
}

fn from_ext(r: &ExtSeries) -> Result<SeriesResult> {
    let v = r.value.to_f64();
    if !v.is_finite() {
        return Err(QError::Range(format!(
            "series value 2^{:.1} overflows a double",
            r.value.log2_abs()
        )));
    }
    Ok(SeriesResult {
        value: Complex64::new(v, 0.0),
        terms_used: r.terms_used,
        cancellation_magnitude: r.cancellation().max(1.0),
        error_bound: r.error_bound() + v.abs() * f64::EPSILON * 0.5,
        extended: true,
    })
}

fn evaluate(ctx: &QContext, kind: Kind, arg: &Argument) -> Result<SeriesResult> {
    arg.validate()?;
    if ctx.precision() == PrecisionMode::Double && !arg.is_zero() {
        match sum_double(ctx, kind, arg) {
            Some(d) if d.cancellation <= CANCELLATION_BUDGET => {
                return Ok(SeriesResult {
                    value: Complex64::new(d.value, 0.0),
                    terms_used: d.terms_used,
                    cancellation_magnitude: d.cancellation,
                    error_bound: d.error_bound,
                    extended: false,
                })
            }
            other if !ctx.failover() => {
                return Err(QError::Precision {
                    cancellation: other.map_or(f64::INFINITY, |d| d.cancellation),
                    detail: format!(
                        "double summation unreliable at {arg:?}; use extended precision"
                    ),
                })
            }
            _ => {}
        }
    }
    from_ext(&sum_ext(ctx, kind, arg, UNDERFLOW_LOG2)?)
}

/// `𝒥_s` at any argument, in the context's precision mode.
pub fn bessel_j_at(ctx: &QContext, s: i64, arg: &Argument) -> Result<SeriesResult> {
    evaluate(ctx, Kind::Bessel { s }, arg)
}

/// `𝒥(x) = Σ_k (−1)^k x^(2k)/([k]!)²`.
pub fn bessel_j(ctx: &QContext, x: f64) -> Result<SeriesResult> {
    bessel_j_at(ctx, 0, &Argument::Value(x))
}

/// Integer-order
/// `𝒥_s(x) = q^(−s(|s|+1)/2)·Σ_k (−1)^k q^(−s·k) x^(2k+|s|)/([k]!·[k+|s|]!)`.
///
/// The weight `q^(−s·k)` is what makes the coefficients
/// `(−1)^j q^(t−j) 𝒥_s(a·q^(t−j))` eigenvectors of the sector matrices of
/// `R`, for negative `s` as well, and the constant in front gives them unit
/// norm. It implies `𝒥_(−s)(x) = q^s·𝒥_s(q^s·x)`.
pub fn bessel_j_order(ctx: &QContext, s: i64, x: f64) -> Result<SeriesResult> {
    bessel_j_at(ctx, s, &Argument::Value(x))
}

/// `𝒩` with constant `c_q` at any argument `x` (the function of `ρ` is
/// obtained with `x² = pρ`).
pub fn neumann_n_at(ctx: &QContext, c_q: f64, arg: &Argument) -> Result<SeriesResult> {
    evaluate(ctx, Kind::Neumann { c_q }, arg)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(QError::Domain(format!("ρ must be positive, got {rho}")))
    }
}

/// q-Neumann function `𝒩(√(pρ))`, logarithmically singular at `ρ = 0`.
pub fn neumann_n(ctx: &QContext, params: &GreenParams, rho: f64) -> Result<SeriesResult> {
    check_rho(rho)?;
    neumann_n_at(ctx, params.c_q, &Argument::Product { p: params.p, rho })
}

/// `𝒩` at the lattice point `ρ = q^(2j)`, with `ln ρ` taken as `2j·ln q`.
pub fn neumann_n_lattice(ctx: &QContext, params: &GreenParams, j: i64) -> Result<SeriesResult> {
    neumann_n_at(ctx, params.c_q, &Argument::Lattice { p: params.p, j })
}

/// Green function `𝒢_p = 𝒩 − i𝒥` at an argument.
pub fn green_g_at(ctx: &QContext, c_q: f64, arg: &Argument) -> Result<Complex64> {
    let n = neumann_n_at(ctx, c_q, arg)?;
    let j = bessel_j_at(ctx, 0, arg)?;
    Ok(Complex64::new(n.value.re, -j.value.re))
}

/// Green function `𝒢_p(ρ) = 𝒩(√(pρ)) − i·𝒥(√(pρ))`.
pub fn green_g(ctx: &QContext, params: &GreenParams, rho: f64) -> Result<Complex64> {
    check_rho(rho)?;
    green_g_at(ctx, params.c_q, &Argument::Product { p: params.p, rho })
}

/// Software-float `𝒥_s`. Results smaller than `2^floor_log2` are only
/// guaranteed in absolute terms.
pub fn bessel_j_ext(ctx: &QContext, s: i64, arg: &Argument, floor_log2: f64) -> Result<ExtSeries> {
    sum_ext(ctx, Kind::Bessel { s }, arg, floor_log2)
}

/// Software-float `𝒩`.
pub fn neumann_n_ext(
    ctx: &QContext,
    c_q: f64,
    arg: &Argument,
    floor_log2: f64,
) -> Result<ExtSeries> {
    sum_ext(ctx, Kind::Neumann { c_q }, arg, floor_log2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_at_zero_is_one() {
        let ctx = QContext::new(0.5).unwrap();
        let r = bessel_j(&ctx, 0.0).unwrap();
        assert_eq!(r.value.re, 1.0);
        assert_eq!(bessel_j_order(&ctx, 2, 0.0).unwrap().value.re, 0.0);
    }

    #[test]
    fn large_arguments_fail_over() {
        let ctx = QContext::new(0.5).unwrap();
        let r = bessel_j_at(&ctx, 0, &Argument::Scaled(-30)).unwrap();
        assert!(r.extended);
        assert!(r.value.re.abs() < 1e-100);
        let strict = ctx.clone().with_failover(false);
        assert!(matches!(
            bessel_j_at(&strict, 0, &Argument::Scaled(-30)),
            Err(QError::Precision { .. })
        ));
    }

    #[test]
    fn green_params_flags() {
        let ctx = QContext::new(0.5).unwrap();
        assert!(GreenParams::new(&ctx, 1.0, 0.0).unwrap().on_lattice);
        assert!(GreenParams::new(&ctx, 0.0625, 0.0).unwrap().on_lattice);
        assert!(!GreenParams::new(&ctx, 0.37, 0.0).unwrap().on_lattice);
        assert!(GreenParams::new(&ctx, 0.0, 0.0).is_err());
        let a = ctx.bessel_scale();
        assert!(GreenParams::new(&ctx, a * a * 16.0, 0.0)
            .unwrap()
            .resonant(&ctx));
        assert!(!GreenParams::new(&ctx, 1.0, 0.0).unwrap().resonant(&ctx));
    }
}
