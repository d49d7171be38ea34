//! The eigenvectors `e_ts = Σ_j (−1)ʲ q^(t−j) 𝒥_s(a q^(t−j)) e_(s+j)⊗e_j`.

use serde::{Deserialize, Serialize};

use super::sector::{DiagonalSector, SectorMatrix};
use crate::context::QContext;
use crate::error::{QError, Result};
use crate::qspecial::BesselTable;

/// Explicit coefficients taken beyond the small-ρ end before the geometric
/// remainder takes over.
const LOW_TAIL_TERMS: i64 = 3;
/// Explicit coefficients taken beyond the large-ρ end; the decay there is
/// faster than geometric, so this is far more than ever needed.
const HIGH_TAIL_TERMS: i64 = 24;

/// One eigenvector `e_ts` restricted to a sector window, with ℓ² bounds on
/// the parts cut off at either end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtsVector {
    pub t: i64,
    pub s: i64,
    pub sector: DiagonalSector,
    /// `c_j` for `j = j_min..=j_max`.
    pub coefficients: Vec<f64>,
    /// ℓ² norm of the coefficients with `j < j_min`.
    pub tail_low: f64,
    /// ℓ² norm of the coefficients with `j > j_max`.
    pub tail_high: f64,
}

impl EtsVector {
    pub fn coefficient(&self, j: i64) -> Option<f64> {
        self.sector.index(j).map(|i| self.coefficients[i])
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn eigenvalue(&self, ctx: &QContext) -> f64 {
        ctx.qpow(2 * self.t)
    }

    pub fn max_tail(&self) -> f64 {
        self.tail_low.max(self.tail_high)
    }
}

/// Table of `𝒥_s(a q^k)` wide enough for every `e_ts` with `t` in
/// `[t_lo, t_hi]` on `sector`, including the explicit tail terms.
fn table_for(ctx: &QContext, sector: &DiagonalSector, t_lo: i64, t_hi: i64) -> Result<BesselTable> {
    BesselTable::new_weighted_cutoff(
        ctx,
        sector.s,
        t_lo - sector.j_max - HIGH_TAIL_TERMS,
        t_hi - sector.j_min + LOW_TAIL_TERMS,
    )
}

fn coefficient(ctx: &QContext, table: &BesselTable, t: i64, j: i64) -> Result<f64> {
    let k = t - j;
    let b = table
        .get(k)
        .ok_or_else(|| QError::Window(format!("𝒥_{} table lacks k = {k}", table.s())))?;
    let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(sign * ctx.qpow(k) * b)
}

fn build(ctx: &QContext, table: &BesselTable, t: i64, sector: DiagonalSector) -> Result<EtsVector> {
    let coefficients = sector
        .indices()
        .map(|j| coefficient(ctx, table, t, j))
        .collect::<Result<Vec<_>>>()?;

    let mut high = 0.0;
    for j in sector.j_max + 1..=sector.j_max + HIGH_TAIL_TERMS {
        high += coefficient(ctx, table, t, j)?.powi(2);
    }

    let mut low = 0.0;
    let mut prev = coefficients[0].abs();
    let mut ratio: f64 = 0.0;
    for j in (sector.j_min - LOW_TAIL_TERMS..sector.j_min).rev() {
        let c = coefficient(ctx, table, t, j)?.abs();
        low += c * c;
        if prev > 0.0 {
            ratio = c / prev;
        }
        prev = c;
    }
    // Still growing towards small ρ: the window end lies inside the
    // oscillatory region and the tail cannot be bounded.
    if ratio >= 1.0 {
        return Ok(EtsVector {
            t,
            s: sector.s,
            sector,
            coefficients,
            tail_low: f64::INFINITY,
            tail_high: high.sqrt(),
        });
    }
    // Geometric remainder past the explicit terms; the true ratio
    // increases towards q^(1+|s|) from below, so bound it by that limit.
    let r = ratio.max(ctx.qpow(1 + sector.s.abs()));
    low += (prev * r).powi(2) / (1.0 - r * r);

    Ok(EtsVector {
        t,
        s: sector.s,
        sector,
        coefficients,
        tail_low: low.sqrt(),
        tail_high: high.sqrt(),
    })
}

/// `e_ts` on `sector`, refusing windows that cut off more than
/// `series_tol` of it (in ℓ² norm) at either end.
pub fn ets_vector(ctx: &QContext, t: i64, sector: DiagonalSector) -> Result<EtsVector> {
    let table = table_for(ctx, &sector, t, t)?;
    let e = build(ctx, &table, t, sector)?;
    if e.max_tail() > ctx.series_tol() {
        return Err(QError::Window(format!(
            "window [{}, {}] too small for e_({t},{}): tail norms {:.3e} (small ρ) and {:.3e} (large ρ) exceed {:.1e}",
            sector.j_min,
            sector.j_max,
            e.s,
            e.tail_low,
            e.tail_high,
            ctx.series_tol()
        )));
    }
    Ok(e)
}

/// Every `e_ts` of one sector whose window tails stay below the context
/// tolerance, i.e. the resolvable part of the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorBasis {
    pub sector: DiagonalSector,
    pub vectors: Vec<EtsVector>,
}

impl SectorBasis {
    pub fn new(ctx: &QContext, sector: DiagonalSector) -> Result<Self> {
        let table = table_for(ctx, &sector, sector.j_min, sector.j_max)?;
        let mut vectors = Vec::new();
        for t in sector.indices() {
            let e = build(ctx, &table, t, sector)?;
            if e.max_tail() <= ctx.series_tol() {
                vectors.push(e);
            }
        }
        if vectors.is_empty() {
            return Err(QError::Window(format!(
                "no e_ts of sector s = {} is resolved in [{}, {}] at tolerance {:.1e}",
                sector.s,
                sector.j_min,
                sector.j_max,
                ctx.series_tol()
            )));
        }
        if vectors.windows(2).any(|w| w[1].t != w[0].t + 1) {
            return Err(QError::Window(format!(
                "resolvable t-range of sector s = {} has gaps",
                sector.s
            )));
        }
        Ok(SectorBasis { sector, vectors })
    }

    pub fn t_range(&self) -> (i64, i64) {
        (self.vectors[0].t, self.vectors[self.vectors.len() - 1].t)
    }

    pub fn get(&self, t: i64) -> Option<&EtsVector> {
        let (lo, hi) = self.t_range();
        (lo..=hi)
            .contains(&t)
            .then(|| &self.vectors[(t - lo) as usize])
    }

    /// Largest deviation of the Gram matrix `(e_ts, e_t's)` from the
    /// identity.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, u) in self.vectors.iter().enumerate() {
            for v in &self.vectors[a..] {
                let dot: f64 = u
                    .coefficients
                    .iter()
                    .zip(&v.coefficients)
                    .map(|(x, y)| x * y)
                    .sum();
                let target = if u.t == v.t { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// `‖(R − q^(2t))e_ts‖` over rows at least `margin` away from both sector
/// ends: absolute, relative to `q^(2t)‖e_ts‖`, and relative to the row
/// magnitudes `Σ_k|R_jk c_k| + q^(2t)|c_j|` (a backward error).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResidual {
    pub absolute: f64,
    pub relative: f64,
    pub backward: f64,
}

pub fn eigen_residual(
    ctx: &QContext,
    matrix: &SectorMatrix,
    e: &EtsVector,
    margin: usize,
) -> Result<EigenResidual> {
    if matrix.sector != e.sector {
        return Err(QError::InvalidParameter(
            "e_ts and matrix live on different sectors".into(),
        ));
    }
    let (rc, scale) = matrix.apply_with_scale(&e.coefficients)?;
    let lambda = e.eigenvalue(ctx);
    let n = e.coefficients.len();
    let mut abs2 = 0.0;
    let mut scale2 = 0.0;
    for i in margin..n.saturating_sub(margin) {
        let c = e.coefficients[i];
        abs2 += (rc[i] - lambda * c).powi(2);
        scale2 += (scale[i] + (lambda * c).abs()).powi(2);
    }
    let absolute = abs2.sqrt();
    let backward = if scale2 > 0.0 {
        absolute / scale2.sqrt()
    } else {
        0.0
    };
    Ok(EigenResidual {
        absolute,
        relative: absolute / (lambda * e.norm()),
        backward,
    })
}
