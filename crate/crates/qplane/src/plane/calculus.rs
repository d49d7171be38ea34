//! Expansion in the `e_ts` basis and functions of `R`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ets::{eigen_residual, EigenResidual, SectorBasis};
use super::jacobi::SymmetricEigen;
use super::sector::{build_sector_matrix, DiagonalSector, SectorClosure, SectorMatrix};
use super::vector::PlaneVector;
use crate::context::QContext;
use crate::eq2::{PhaseParams, TruncatedBasis};
use crate::error::{QError, Result};
use crate::qspecial::{green_g_at, Argument, GreenParams};

/// Analytic bases for a set of sectors of one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneBasis {
    pub basis: TruncatedBasis,
    pub sectors: BTreeMap<i64, SectorBasis>,
}

impl PlaneBasis {
    pub fn new(ctx: &QContext, basis: TruncatedBasis, sectors: &[i64]) -> Result<Self> {
        let built = sectors
            .par_iter()
            .map(|&s| {
                Ok((
                    s,
                    SectorBasis::new(ctx, DiagonalSector::in_window(basis, s)?)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PlaneBasis {
            basis,
            sectors: built.into_iter().collect(),
        })
    }

    /// Bases for every sector in which `v` has weight.
    pub fn for_vector(ctx: &QContext, v: &PlaneVector) -> Result<Self> {
        Self::new(ctx, v.basis(), &v.sectors())
    }
}

/// Coefficients `(e_ts, v)` keyed by `(t, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtsExpansion {
    pub coefficients: BTreeMap<(i64, i64), Complex64>,
    /// `‖v‖² − Σ|coefficient|²`, the weight outside the resolved spectrum.
    pub unresolved: f64,
    pub norm_sqr: f64,
}

impl EtsExpansion {
    pub fn get(&self, t: i64, s: i64) -> Complex64 {
        self.coefficients.get(&(t, s)).copied().unwrap_or_default()
    }

    pub fn parseval_sum(&self) -> f64 {
        self.coefficients.values().map(|c| c.norm_sqr()).sum()
    }
}

/// Project `v` onto the resolved `e_ts` of each of its sectors.
///
/// `tol` bounds, relative to `‖v‖²`, both the weight left outside the
/// resolved spectrum and the weight on the two edge values of `t`;
/// exceeding it is a resolution error.
pub fn expand_in_ets(v: &PlaneVector, windows: &PlaneBasis, tol: f64) -> Result<EtsExpansion> {
    if v.basis() != windows.basis {
        return Err(QError::InvalidParameter(
            "vector and e_ts bases live on different grids".into(),
        ));
    }
    if !v.is_interior() {
        return Err(QError::Window(
            "vector has weight outside the grid interior".into(),
        ));
    }
    let norm_sqr = v.norm_sqr();
    let mut coefficients = BTreeMap::new();
    let mut captured = 0.0;
    for s in v.sectors() {
        let sb = windows
            .sectors
            .get(&s)
            .ok_or_else(|| QError::Resolution(format!("no e_ts basis for sector s = {s}")))?;
        let part = v.sector_part(&sb.sector);
        let (t_lo, t_hi) = sb.t_range();
        let mut edge = 0.0;
        for e in &sb.vectors {
            let c: Complex64 = e.coefficients.iter().zip(&part).map(|(x, y)| y * *x).sum();
            if e.t == t_lo || e.t == t_hi {
                edge += c.norm_sqr();
            }
            captured += c.norm_sqr();
            coefficients.insert((e.t, s), c);
        }
        if edge > tol * norm_sqr {
            return Err(QError::Resolution(format!(
                "sector s = {s}: weight {:.3e} on the edge values t = {t_lo}, {t_hi} exceeds {tol:.1e}",
                edge / norm_sqr
            )));
        }
    }
    let unresolved = norm_sqr - captured;
    if unresolved.abs() > tol * norm_sqr {
        return Err(QError::Resolution(format!(
            "relative weight {:.3e} outside the resolved spectrum exceeds {tol:.1e}",
            unresolved / norm_sqr
        )));
    }
    Ok(EtsExpansion {
        coefficients,
        unresolved,
        norm_sqr,
    })
}

/// `Σ coefficient(t, s)·e_ts`.
pub fn reconstruct(expansion: &EtsExpansion, windows: &PlaneBasis) -> Result<PlaneVector> {
    let mut out = PlaneVector::zeros(windows.basis);
    for (&(t, s), c) in &expansion.coefficients {
        let e = windows
            .sectors
            .get(&s)
            .and_then(|sb| sb.get(t))
            .ok_or_else(|| QError::Resolution(format!("e_({t},{s}) not in the basis")))?;
        let part: Vec<Complex64> = e.coefficients.iter().map(|x| c * x).collect();
        out.add_sector(&e.sector, &part)?;
    }
    Ok(out)
}

/// `f(R)v = Σ f(q^(2t))·(e_ts, v)·e_ts`, with `f` given on the exponent `t`.
pub fn apply_function_analytic(
    v: &PlaneVector,
    windows: &PlaneBasis,
    tol: f64,
    f: impl Fn(i64) -> Result<Complex64> + Sync,
) -> Result<PlaneVector> {
    let mut expansion = expand_in_ets(v, windows, tol)?;
    let values = expansion
        .coefficients
        .par_iter()
        .map(|(&(t, s), c)| {
            Ok((
                (t, s),
                if *c == Complex64::default() {
                    *c
                } else {
                    f(t)? * c
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    expansion.coefficients = values.into_iter().collect();
    reconstruct(&expansion, windows)
}

/// `𝒢ᵖ(q^(2t))`, evaluated on the exact lattice point.
pub fn green_at_eigenvalue(ctx: &QContext, params: &GreenParams, t: i64) -> Result<Complex64> {
    green_g_at(ctx, params.c_q, &Argument::Lattice { p: params.p, j: t })
}

/// `𝒢ᵖ(R)v` through the analytic eigenbasis.
pub fn apply_green_plane(
    ctx: &QContext,
    params: &GreenParams,
    v: &PlaneVector,
    windows: &PlaneBasis,
    tol: f64,
) -> Result<PlaneVector> {
    apply_function_analytic(v, windows, tol, |t| green_at_eigenvalue(ctx, params, t))
}

/// Numeric eigendecomposition of one sector matrix (with the asymptotic
/// closure), each resolved `t` paired with the eigenvalue nearest to
/// `q^(2t)` on a log scale.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericSector {
    pub matrix: SectorMatrix,
    pub eigen: SymmetricEigen,
    /// `(t, index into eigen)` for the resolved `t`.
    pub matched: Vec<(i64, usize)>,
}

impl NumericSector {
    pub fn new(ctx: &QContext, analytic: &SectorBasis) -> Result<Self> {
        let matrix = build_sector_matrix(
            ctx,
            analytic.sector,
            PhaseParams::default(),
            SectorClosure::Asymptotic,
        )?;
        let eigen = matrix.eigen()?;
        let mut matched = Vec::with_capacity(analytic.vectors.len());
        for e in &analytic.vectors {
            let target = e.eigenvalue(ctx).ln();
            let k = eigen
                .values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .min_by(|a, b| {
                    (a.1.ln() - target)
                        .abs()
                        .total_cmp(&(b.1.ln() - target).abs())
                })
                .map(|(k, _)| k)
                .ok_or_else(|| {
                    QError::Resolution("sector matrix has no positive eigenvalue".into())
                })?;
            if matched.iter().any(|&(_, m)| m == k) {
                return Err(QError::Resolution(format!(
                    "two resolved t share the numeric eigenvalue {:.6e} in sector s = {}",
                    eigen.values[k], analytic.sector.s
                )));
            }
            matched.push((e.t, k));
        }
        Ok(NumericSector {
            matrix,
            eigen,
            matched,
        })
    }
}

/// Numeric spectra for every sector of a [`PlaneBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct NumericSpectrum {
    pub sectors: BTreeMap<i64, NumericSector>,
}

impl NumericSpectrum {
    pub fn new(ctx: &QContext, windows: &PlaneBasis) -> Result<Self> {
        let built = windows
            .sectors
            .par_iter()
            .map(|(&s, sb)| Ok((s, NumericSector::new(ctx, sb)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(NumericSpectrum {
            sectors: built.into_iter().collect(),
        })
    }
}

/// `f(R)v` through the numeric eigenpairs matched to the resolved `t`,
/// with `f` evaluated at the analytic eigenvalue `q^(2t)`.
///
/// Eigenvector components are only accurate to about `ε` in absolute
/// terms, so projections `(u, v)` below `8nε‖v_s‖` (n the sector length)
/// are indistinguishable from zero and are dropped; otherwise a rapidly
/// growing `f` would multiply rounding noise.
pub fn apply_function_numeric(
    v: &PlaneVector,
    spectrum: &NumericSpectrum,
    f: impl Fn(i64) -> Result<Complex64> + Sync,
) -> Result<PlaneVector> {
    let mut out = PlaneVector::zeros(v.basis());
    for s in v.sectors() {
        let ns = spectrum
            .sectors
            .get(&s)
            .ok_or_else(|| QError::Resolution(format!("no numeric spectrum for sector s = {s}")))?;
        let sector = ns.matrix.sector;
        let part = v.sector_part(&sector);
        let part_norm = part.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let noise = 8.0 * sector.len() as f64 * f64::EPSILON * part_norm;
        let mut acc = vec![Complex64::default(); sector.len()];
        for &(t, k) in &ns.matched {
            let u = &ns.eigen.vectors[k];
            let c: Complex64 = u.iter().zip(&part).map(|(x, y)| y * *x).sum();
            if c.norm() <= noise {
                continue;
            }
            let fc = f(t)? * c;
            for (a, x) in acc.iter_mut().zip(u) {
                *a += fc * *x;
            }
        }
        out.add_sector(&sector, &acc)?;
    }
    Ok(out)
}

/// One row of a sector spectrum comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub t: i64,
    pub s: i64,
    /// Numeric eigenvalue of the sector matrix.
    pub eigenvalue: f64,
    /// `q^(2t)`.
    pub expected: f64,
    /// `|eigenvalue/q^(2t) − 1|`.
    pub relative_error: f64,
    pub residual: EigenResidual,
    /// `|(u, e_ts)|` for the matched unit eigenvector `u`.
    pub overlap: f64,
}

/// Compare the analytic `e_ts` of one sector with the numeric
/// eigendecomposition, over the resolved `t`. Residuals skip `margin` rows
/// at each end.
pub fn sector_spectrum(ctx: &QContext, basis: TruncatedBasis, s: i64) -> Result<Vec<SpectrumRow>> {
    let analytic = SectorBasis::new(ctx, DiagonalSector::in_window(basis, s)?)?;
    let numeric = NumericSector::new(ctx, &analytic)?;
    let plain = build_sector_matrix(
        ctx,
        analytic.sector,
        PhaseParams::default(),
        SectorClosure::Truncate,
    )?;
    let margin = basis.margin() as usize;
    analytic
        .vectors
        .iter()
        .zip(&numeric.matched)
        .map(|(e, &(_, k))| {
            let expected = e.eigenvalue(ctx);
            let eigenvalue = numeric.eigen.values[k];
            let u = &numeric.eigen.vectors[k];
            let overlap = u
                .iter()
                .zip(&e.coefficients)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs()
                / e.norm();
            Ok(SpectrumRow {
                t: e.t,
                s,
                eigenvalue,
                expected,
                relative_error: (eigenvalue / expected - 1.0).abs(),
                residual: eigen_residual(ctx, &plain, e, margin)?,
                overlap,
            })
        })
        .collect()
}
