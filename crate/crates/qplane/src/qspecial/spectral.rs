//! The spectral representation
//! `𝒢_p(ρ) ≈ q⁻²·∫ d_(q²)λ 𝒥(√(λρ))/(p − λ + iε)` and the fit of `C_q`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fourier::accurate_value;
use super::series::Argument;
use super::{bessel_j_at, neumann_n, GreenParams, SeriesResult};
use crate::context::QContext;
use crate::error::{QError, Result};
use crate::qcalc::lattice_point;

/// Lattice carrying the λ-integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralLattice {
    /// `λ_j = a²·q^(2j)`: the spectrum of the radial operator. The sum
    /// converges at both ends for ρ on the lattice.
    Scaled,
    /// `λ_j = q^(2j)`. Diverges at the large-λ end for every `ρ > 0`.
    Literal,
}

/// Regularisation and window of the λ-sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEvalParams {
    pub epsilon: f64,
    pub j_min: i64,
    pub j_max: i64,
    pub lattice: SpectralLattice,
}

impl SpectralEvalParams {
    pub fn new(epsilon: f64, j_min: i64, j_max: i64, lattice: SpectralLattice) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(QError::InvalidParameter(format!(
                "ε must be non-negative, got {epsilon}"
            )));
        }
        if j_min >= j_max {
            return Err(QError::Window(format!("empty λ window [{j_min}, {j_max}]")));
        }
        Ok(SpectralEvalParams {
            epsilon,
            j_min,
            j_max,
            lattice,
        })
    }

    /// Same ε with the window doubled about the origin.
    pub fn doubled(&self) -> Self {
        SpectralEvalParams {
            j_min: 2 * self.j_min.min(-1),
            j_max: 2 * self.j_max.max(1),
            ..*self
        }
    }
}

/// Index `i` with `ρ == q^(2i)` bit for bit, if any.
fn lattice_index(ctx: &QContext, rho: f64) -> Option<i64> {
    let i = (rho.ln() / ctx.q2().ln()).round();
    if !i.is_finite() || i.abs() > 4000.0 {
        return None;
    }
    let i = i as i64;
    (lattice_point(ctx, i) == rho).then_some(i)
}

/// Windowed spectral sum
/// `q⁻²(1−q²)·Σ_j λ_j·𝒥(√(λ_j ρ))/(p − λ_j + iε)`.
///
/// The small-λ tail is geometric and estimated; at the large-λ end the
/// terms must die out, otherwise a divergence error is returned with the
/// partial sums accumulated from the small-λ end outwards.
pub fn spectral_green(
    ctx: &QContext,
    params: &GreenParams,
    sp: &SpectralEvalParams,
    rho: f64,
) -> Result<SeriesResult> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(QError::Domain(format!("ρ must be non-negative, got {rho}")));
    }
    let resonant = match sp.lattice {
        SpectralLattice::Scaled => params.resonant(ctx),
        SpectralLattice::Literal => params.on_lattice,
    };
    if sp.epsilon == 0.0 && (params.on_lattice || resonant) {
        return Err(QError::InvalidParameter(format!(
            "p = {} lies on the lattice; ε > 0 is required",
            params.p
        )));
    }
    let a2 = match sp.lattice {
        SpectralLattice::Scaled => ctx.bessel_scale().powi(2),
        SpectralLattice::Literal => 1.0,
    };
    let rho_index = if rho > 0.0 {
        lattice_index(ctx, rho)
    } else {
        None
    };
    let w = (1.0 - ctx.q2()) / ctx.q2();
    let terms = (sp.j_min..=sp.j_max)
        .into_par_iter()
        .map(|j| {
            let lam = a2 * lattice_point(ctx, j);
            let jv = if rho == 0.0 {
                1.0
            } else {
                let arg = match (rho_index, sp.lattice) {
                    (Some(i), SpectralLattice::Scaled) => Argument::Scaled(i + j),
                    (Some(i), SpectralLattice::Literal) => Argument::Lattice { p: 1.0, j: i + j },
                    (None, _) => Argument::Product { p: lam, rho },
                };
                match accurate_value(ctx, 0, &arg) {
                    Ok(v) => v,
                    Err(QError::Range(_)) => f64::INFINITY,
                    Err(e) => return Err(e),
                }
            };
            Ok(Complex64::new(w * lam * jv, 0.0) / Complex64::new(params.p - lam, sp.epsilon))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut value = Complex64::new(0.0, 0.0);
    let mut partial_sums = Vec::with_capacity(terms.len());
    for t in terms.iter().rev() {
        value += t;
        partial_sums.push(value);
    }
    let mags: Vec<f64> = terms.iter().map(|t| t.norm()).collect();
    let total: f64 = mags.iter().filter(|m| m.is_finite()).sum();
    let n = mags.len();
    let ratio = |a: f64, b: f64| {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a / b
        }
    };

    // large-λ end: first entries
    let r_hi = ratio(mags[0], mags[1]).max(ratio(mags[1], mags[2]));
    let band = (n / 10).max(1);
    let band_sum: f64 = mags[..band].iter().sum();
    let converged_hi = value.re.is_finite()
        && value.im.is_finite()
        && (r_hi < 1.0 || band_sum <= ctx.series_tol() * value.norm());
    if !converged_hi {
        return Err(QError::Divergence {
            detail: format!(
                "λ-sum does not converge at the large-λ end (j = {}): edge terms {:.3e}, {:.3e}",
                sp.j_min, mags[0], mags[1]
            ),
            partial: value,
            partial_sums,
        });
    }
    let tail_hi = if r_hi < 1.0 {
        mags[0] * r_hi / (1.0 - r_hi)
    } else {
        band_sum
    };
    let r_lo = ratio(mags[n - 1], mags[n - 2]).max(ratio(mags[n - 2], mags[n - 3]));
    let tail_lo = if r_lo < 1.0 {
        mags[n - 1] * r_lo / (1.0 - r_lo)
    } else {
        mags[n - band..].iter().sum()
    };
    let v = value.norm();
    Ok(SeriesResult {
        value,
        terms_used: n,
        cancellation_magnitude: if v > 0.0 {
            (total / v).max(1.0)
        } else {
            f64::INFINITY
        },
        error_bound: tail_hi + tail_lo + n as f64 * f64::EPSILON * total,
        extended: false,
    })
}

/// One grid point of a `C_q` fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqPoint {
    pub p: f64,
    pub rho: f64,
    pub spectral: Complex64,
    /// `𝒩(·; c = 0) − i𝒥` at this point.
    pub model_at_zero: Complex64,
    /// `(q − q⁻¹)/(q ln q)·𝒥`: the derivative of the model in `c_q`.
    pub slope: f64,
    pub residual: f64,
}

/// Result of fitting the Neumann constant to the spectral representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqEstimate {
    pub c_q: f64,
    /// `‖spectral − (𝒩 − i𝒥)‖ / ‖spectral‖` over the grid.
    pub relative_residual: f64,
    /// A one-parameter linear least-squares problem.
    pub condition_number: f64,
    pub points: Vec<CqPoint>,
    /// Best constant for each `p` separately.
    pub per_p: Vec<(f64, f64)>,
    /// Estimate with the λ-window doubled.
    pub doubled_window_c_q: f64,
    pub window_shift: f64,
}

fn fit(points: &[CqPoint]) -> (f64, f64) {
    let num: f64 = points
        .iter()
        .map(|pt| pt.slope * (pt.spectral.re - pt.model_at_zero.re))
        .sum();
    let den: f64 = points.iter().map(|pt| pt.slope * pt.slope).sum();
    let c = if den > 0.0 { num / den } else { 0.0 };
    let mut r2 = 0.0;
    let mut s2 = 0.0;
    for pt in points {
        let model = pt.model_at_zero + c * pt.slope;
        r2 += (pt.spectral - model).norm_sqr();
        s2 += pt.spectral.norm_sqr();
    }
    (
        c,
        if s2 > 0.0 {
            (r2 / s2).sqrt()
        } else {
            f64::INFINITY
        },
    )
}

fn grid_points(
    ctx: &QContext,
    p_grid: &[f64],
    rho_grid: &[f64],
    sp: &SpectralEvalParams,
) -> Result<Vec<CqPoint>> {
    let slope_factor = {
        let q = ctx.q();
        (q - 1.0 / q) / (q * q.ln())
    };
    let pairs: Vec<(f64, f64)> = p_grid
        .iter()
        .flat_map(|&p| rho_grid.iter().map(move |&r| (p, r)))
        .collect();
    pairs
        .par_iter()
        .map(|&(p, rho)| {
            let params = GreenParams::new(ctx, p, 0.0)?;
            let spectral = spectral_green(ctx, &params, sp, rho)?.value;
            let n0 = neumann_n(ctx, &params, rho)?.value.re;
            let j = bessel_j_at(ctx, 0, &Argument::Product { p, rho })?.value.re;
            Ok(CqPoint {
                p,
                rho,
                spectral,
                model_at_zero: Complex64::new(n0, -j),
                slope: slope_factor * j,
                residual: 0.0,
            })
        })
        .collect()
}

/// Least-squares `C_q` matching `spectral_green` to `𝒩 − i𝒥` over a grid.
///
/// The model is linear in `c_q`, so the minimiser solves a single normal
/// equation. Fails with the full report attached when the relative
/// residual exceeds `threshold`.
pub fn estimate_c_q(
    ctx: &QContext,
    p_grid: &[f64],
    rho_grid: &[f64],
    sp: &SpectralEvalParams,
    threshold: f64,
) -> Result<CqEstimate> {
    if p_grid.is_empty() || rho_grid.is_empty() {
        return Err(QError::InvalidParameter("empty calibration grid".into()));
    }
    let mut points = grid_points(ctx, p_grid, rho_grid, sp)?;
    let (c_q, relative_residual) = fit(&points);
    for pt in &mut points {
        pt.residual = (pt.spectral - (pt.model_at_zero + c_q * pt.slope)).norm();
    }
    let per_p = p_grid
        .iter()
        .map(|&p| {
            let sub: Vec<CqPoint> = points.iter().filter(|pt| pt.p == p).copied().collect();
            (p, fit(&sub).0)
        })
        .collect();
    let doubled = grid_points(ctx, p_grid, rho_grid, &sp.doubled())?;
    let (c2, _) = fit(&doubled);
    let report = CqEstimate {
        c_q,
        relative_residual,
        condition_number: 1.0,
        points,
        per_p,
        doubled_window_c_q: c2,
        window_shift: (c2 - c_q).abs(),
    };
    if relative_residual.is_nan() || relative_residual > threshold {
        return Err(QError::Calibration {
            relative_residual,
            threshold,
            report: Box::new(report),
        });
    }
    Ok(report)
}
