//! Diagonal sectors of the radius operator `R = Δ(ρ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jacobi::{jacobi_eigen, SymmetricEigen};
use crate::context::QContext;
use crate::eq2::{radius_operator, LatticeOperator, PhaseParams, TensorBasis, TruncatedBasis};
use crate::error::{QError, Result};

/// The span of `e_(s+j)⊗e_j` for `j` in `[j_min, j_max]`, the part of the
/// sector `s` that fits in the square window of half-width `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalSector {
    pub s: i64,
    pub j_min: i64,
    pub j_max: i64,
}

impl DiagonalSector {
    pub fn in_window(basis: TruncatedBasis, s: i64) -> Result<Self> {
        let l = basis.half_width();
        let (j_min, j_max) = ((-l).max(-l - s), l.min(l - s));
        if j_min >= j_max {
            return Err(QError::Window(format!(
                "sector s = {s} does not fit in a window of half-width {l}"
            )));
        }
        Ok(DiagonalSector { s, j_min, j_max })
    }

    pub fn len(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, j: i64) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    pub fn index(&self, j: i64) -> Option<usize> {
        self.contains(j).then(|| (j - self.j_min) as usize)
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.j_min..=self.j_max
    }
}

/// How the first row of a sector matrix treats the neighbour `j_min − 1`
/// that lies outside the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SectorClosure {
    /// Drop it (plain truncation of `R`).
    #[default]
    Truncate,
    /// Replace `c_(j−1)` by `−q^(1+|s|)·c_j`, the ratio of every square
    /// summable solution of the recurrence at the large-ρ end.
    Asymptotic,
}

/// Symmetric tridiagonal matrix of `R` on one sector:
/// `diag_j = q^(2(s+j)) + q^(2j)`, `off_(j,j+1) = q^(s+2j+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorMatrix {
    pub sector: DiagonalSector,
    pub closure: SectorClosure,
    pub diag: Vec<f64>,
    /// `off[i]` couples `j_min + i` and `j_min + i + 1`.
    pub off: Vec<f64>,
}

fn sector_entries(ctx: &QContext, s: i64, j: i64) -> (f64, f64) {
    (
        ctx.qpow(2 * (s + j)) + ctx.qpow(2 * j),
        ctx.qpow(s + 2 * j + 1),
    )
}

pub fn build_sector_matrix(
    ctx: &QContext,
    sector: DiagonalSector,
    phases: PhaseParams,
    closure: SectorClosure,
) -> Result<SectorMatrix> {
    if !phases.is_trivial() {
        return Err(QError::Unsupported(format!(
            "sector decomposition needs ψ = φ = 0 (got ψ = {}, φ = {})",
            phases.psi(),
            phases.phi()
        )));
    }
    let s = sector.s;
    let mut diag = Vec::with_capacity(sector.len());
    let mut off = Vec::with_capacity(sector.len() - 1);
    for j in sector.indices() {
        let (d, o) = sector_entries(ctx, s, j);
        diag.push(d);
        if j < sector.j_max {
            off.push(o);
        }
    }
    if closure == SectorClosure::Asymptotic {
        let outside = ctx.qpow(s + 2 * sector.j_min - 1);
        diag[0] -= ctx.qpow(1 + s.abs()) * outside;
    }
    Ok(SectorMatrix {
        sector,
        closure,
        diag,
        off,
    })
}

impl SectorMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i + 1 < n {
                a[i][i + 1] = self.off[i];
                a[i + 1][i] = self.off[i];
            }
        }
        a
    }

    /// `(M c)_i` together with `Σ|M_ik c_k|`, the rounding scale of the row.
    pub fn apply_with_scale(&self, c: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        if c.len() != n {
            return Err(QError::InvalidParameter(format!(
                "vector length {} for a {n}×{n} matrix",
                c.len()
            )));
        }
        let mut out = vec![0.0; n];
        let mut scale = vec![0.0; n];
        for i in 0..n {
            let mut terms = vec![self.diag[i] * c[i]];
            if i > 0 {
                terms.push(self.off[i - 1] * c[i - 1]);
            }
            if i + 1 < n {
                terms.push(self.off[i] * c[i + 1]);
            }
            out[i] = terms.iter().sum();
            scale[i] = terms.iter().map(|t| t.abs()).sum();
        }
        Ok((out, scale))
    }

    pub fn apply(&self, c: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply_with_scale(c)?.0)
    }

    pub fn eigen(&self) -> Result<SymmetricEigen> {
        jacobi_eigen(self.to_dense())
    }
}

/// Largest deviation between the sector matrix and the tensor realisation
/// of `R` on sector basis vectors whose neighbours stay inside the interior,
/// and the largest `R` entry linking different sectors (exactly zero when
/// `R` is block diagonal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorComparison {
    pub max_deviation: f64,
    pub max_entry: f64,
    pub cross_sector: f64,
}

pub fn compare_with_radius_operator(
    ctx: &QContext,
    basis: TruncatedBasis,
    matrix: &SectorMatrix,
) -> Result<SectorComparison> {
    let r = radius_operator(basis, PhaseParams::default(), ctx);
    compare_with(basis, &r, matrix)
}

/// As [`compare_with_radius_operator`] with a prebuilt `R`.
pub fn compare_with(
    basis: TruncatedBasis,
    r: &LatticeOperator,
    matrix: &SectorMatrix,
) -> Result<SectorComparison> {
    let tb = TensorBasis::square(basis);
    if r.dim() != tb.dim() {
        return Err(QError::InvalidParameter(
            "R does not act on this window".into(),
        ));
    }
    let s = matrix.sector.s;
    let dense = matrix.to_dense();
    let mut max_deviation: f64 = 0.0;
    let mut max_entry: f64 = 0.0;
    for j in matrix.sector.indices() {
        if !tb.is_interior(s + j, j) {
            continue;
        }
        let Some(col) = tb.index(s + j, j) else {
            continue;
        };
        for k in [j - 1, j, j + 1] {
            let (Some(row), Some(i)) = (tb.index(s + k, k), matrix.sector.index(k)) else {
                continue;
            };
            let expected = dense[i][(j - matrix.sector.j_min) as usize];
            let got = r.get(row, col);
            max_deviation = max_deviation.max((got - Complex64::new(expected, 0.0)).norm());
            max_entry = max_entry.max(expected.abs());
        }
    }
    let cross_sector = r
        .entries()
        .filter(|&(row, col, _)| {
            let (a, b) = tb.label(row);
            let (c, d) = tb.label(col);
            a - b != c - d
        })
        .map(|(_, _, v)| v.norm())
        .fold(0.0, f64::max);
    Ok(SectorComparison {
        max_deviation,
        max_entry,
        cross_sector,
    })
}
