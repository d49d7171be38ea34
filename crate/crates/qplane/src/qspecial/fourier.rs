//! Tables of 𝒥_s on the decaying lattice and the Fourier–Bessel integrals.

use num_complex::Complex64;
use rayon::prelude::*;

use super::series::{sum_double, sum_ext, Argument, Kind, UNDERFLOW_LOG2};
use crate::context::QContext;
use crate::error::{QError, Result};
use crate::qcalc::{
    jackson_sum, jackson_sum_split, q_factorial, DecayClass, QLattice, WeightedPairing,
};

/// Cancellation a table entry may lose in double before software floats
/// take over (about four bits).
const TABLE_CANCELLATION: f64 = 16.0;

/// `𝒥_s(a·q^k)` for a contiguous range of `k`, correctly rounded to
/// double (up to values below the double range, which are stored as 0).
#[derive(Debug, Clone, PartialEq)]
pub struct BesselTable {
    s: i64,
    k_min: i64,
    values: Vec<f64>,
}

pub(crate) fn accurate_value(ctx: &QContext, s: i64, arg: &Argument) -> Result<f64> {
    let kind = Kind::Bessel { s };
    if let Some(d) = sum_double(ctx, kind, arg) {
        if d.cancellation <= TABLE_CANCELLATION {
            return Ok(d.value);
        }
    }
    let v = sum_ext(ctx, kind, arg, UNDERFLOW_LOG2)?.value.to_f64();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QError::Range(format!(
            "𝒥_{s} at {arg:?} overflows a double"
        )))
    }
}

impl BesselTable {
    pub fn new(ctx: &QContext, s: i64, k_min: i64, k_max: i64) -> Result<Self> {
        if k_min > k_max {
            return Err(QError::Window(format!(
                "empty table range [{k_min}, {k_max}]"
            )));
        }
        let values = (k_min..=k_max)
            .into_par_iter()
            .map(|k| accurate_value(ctx, s, &Argument::Scaled(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BesselTable { s, k_min, values })
    }

    /// Like [`BesselTable::new`] for the weighted values `q^k·𝒥_s(a q^k)`,
    /// which decay faster than geometrically as `k → −∞`: entries are
    /// computed downwards from `k_max` and, once a whole block of negative
    /// `k` has weighted magnitude below the smallest positive double and
    /// decreasing, the remaining ones are stored as 0.
    pub fn new_weighted_cutoff(ctx: &QContext, s: i64, k_min: i64, k_max: i64) -> Result<Self> {
        const BLOCK: i64 = 8;
        if k_min > k_max {
            return Err(QError::Window(format!(
                "empty table range [{k_min}, {k_max}]"
            )));
        }
        let mut values = vec![0.0; (k_max - k_min + 1) as usize];
        let mut hi = k_max;
        let mut last = f64::INFINITY;
        while hi >= k_min {
            let lo = (hi - BLOCK + 1).max(k_min);
            let block = (lo..=hi)
                .into_par_iter()
                .map(|k| accurate_value(ctx, s, &Argument::Scaled(k)))
                .collect::<Result<Vec<_>>>()?;
            let weighted: Vec<f64> = (lo..=hi)
                .zip(&block)
                .map(|(k, v)| (ctx.qpow(k) * v).abs())
                .collect();
            for (k, v) in (lo..=hi).zip(block) {
                values[(k - k_min) as usize] = v;
            }
            let decreasing =
                weighted.windows(2).all(|w| w[0] <= w[1]) && weighted[weighted.len() - 1] <= last;
            if hi < 0 && decreasing && weighted.iter().all(|w| *w < f64::MIN_POSITIVE) {
                break;
            }
            last = weighted[0];
            hi = lo - 1;
        }
        Ok(BesselTable { s, k_min, values })
    }

    pub fn s(&self) -> i64 {
        self.s
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.values.len() as i64 - 1
    }

    /// `𝒥_s(a·q^k)`, `None` outside the table.
    pub fn get(&self, k: i64) -> Option<f64> {
        if k < self.k_min {
            return None;
        }
        self.values.get((k - self.k_min) as usize).copied()
    }
}

/// `(1−q²)·Σ_(j>J) q^(2j)·𝒥(a q^(n+j))·𝒥(a q^(m+j))` summed in closed form
/// from the power series of both factors.
fn small_rho_tail(ctx: &QContext, n: i64, m: i64, j_last: i64) -> Result<f64> {
    let q2 = ctx.q2();
    let a2 = ctx.bessel_scale().powi(2);
    let base = ctx.qpow(2 * (j_last + 1));
    let un = a2 * ctx.qpow(2 * n) * base;
    let um = a2 * ctx.qpow(2 * m) * base;
    if !(un < 1.0 && um < 1.0) {
        return Err(QError::Window(format!(
            "window end j = {j_last} too shallow for the small-ρ completion (u = {un:.3e}, {um:.3e})"
        )));
    }
    let kmax = 60;
    let c: Vec<f64> = (0..=kmax)
        .map(|k| {
            let f = q_factorial(ctx, k as i64).unwrap_or(f64::INFINITY);
            (if k % 2 == 0 { 1.0 } else { -1.0 }) / (f * f)
        })
        .collect();
    let mut total = 0.0;
    let mut pk = 1.0;
    for k in 0..=kmax {
        let mut pl = 1.0;
        let mut row = 0.0;
        for l in 0..=kmax {
            let t = c[k] * c[l] * pk * pl / (1.0 - q2.powi((1 + k + l) as i32));
            row += t;
            if t.abs() < 1e-40 * row.abs().max(1e-300) {
                break;
            }
            pl *= um;
        }
        total += row;
        if row.abs() < 1e-40 * total.abs().max(1e-300) {
            break;
        }
        pk *= un;
    }
    Ok((1.0 - q2) * base * total)
}

fn entry_from_table(
    ctx: &QContext,
    table: &BesselTable,
    n: i64,
    m: i64,
    lattice: &QLattice,
    complete_tail: bool,
) -> Result<WeightedPairing> {
    let terms = lattice
        .indices()
        .map(|j| {
            let a = table
                .get(n + j)
                .ok_or_else(|| QError::Window("table too short".into()))?;
            let b = table
                .get(m + j)
                .ok_or_else(|| QError::Window("table too short".into()))?;
            Ok(Complex64::new(a * b, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let s = jackson_sum_split(ctx, lattice, &terms, DecayClass::Summable)?;
    if complete_tail {
        let tail = small_rho_tail(ctx, n, m, lattice.j_max())?;
        Ok(WeightedPairing {
            value: s.value + tail,
            truncation_estimate: s.large_rho_tail + 1e-15 * tail.abs(),
        })
    } else {
        Ok(WeightedPairing {
            value: s.value,
            truncation_estimate: s.large_rho_tail + s.small_rho_tail,
        })
    }
}

/// Fourier–Bessel integral
/// `M(n, m) = (1−q²)·Σ_j q^(2j)·𝒥(a·qⁿ·√ρ_j)·𝒥(a·qᵐ·√ρ_j)` on the window.
///
/// With `complete_tail` the part of the sum beyond the small-ρ end of the
/// window is added in closed form; the large-ρ side decays
/// super-exponentially and is only estimated.
pub fn fourier_bessel_entry(
    ctx: &QContext,
    n: i64,
    m: i64,
    lattice: &QLattice,
    complete_tail: bool,
) -> Result<WeightedPairing> {
    let lo = n.min(m) + lattice.j_min();
    let hi = n.max(m) + lattice.j_max();
    let table = BesselTable::new(ctx, 0, lo, hi)?;
    entry_from_table(ctx, &table, n, m, lattice, complete_tail)
}

/// All entries `M(n, m)` for `n, m ∈ range`, row-major.
pub fn fourier_bessel_matrix(
    ctx: &QContext,
    range: std::ops::RangeInclusive<i64>,
    lattice: &QLattice,
    complete_tail: bool,
) -> Result<Vec<Vec<WeightedPairing>>> {
    let (lo, hi) = (*range.start(), *range.end());
    let table = BesselTable::new(ctx, 0, lo + lattice.j_min(), hi + lattice.j_max())?;
    range
        .clone()
        .map(|n| {
            range
                .clone()
                .map(|m| entry_from_table(ctx, &table, n, m, lattice, complete_tail))
                .collect()
        })
        .collect()
}

/// The same integral with the unscaled argument `𝒥(qⁿ·√ρ_j)`.
///
/// On `ρ = q^(2j)` these values grow super-exponentially at large ρ, so the
/// sum is reported as divergent unless the window is very short.
pub fn fourier_bessel_literal_entry(
    ctx: &QContext,
    n: i64,
    m: i64,
    lattice: &QLattice,
) -> Result<WeightedPairing> {
    let mut terms = Vec::with_capacity(lattice.len());
    for j in lattice.indices() {
        let f = |k: i64| accurate_value(ctx, 0, &Argument::Lattice { p: 1.0, j: k });
        match (f(n + j), f(m + j)) {
            (Ok(a), Ok(b)) if (a * b).is_finite() => terms.push(Complex64::new(a * b, 0.0)),
            (Err(e), _) | (_, Err(e)) if !matches!(e, QError::Range(_)) => return Err(e),
            _ => {
                return Err(QError::Divergence {
                    detail: format!("integrand 𝒥(q^k)² leaves the double range at j = {j}"),
                    partial: Complex64::new(f64::INFINITY, 0.0),
                    partial_sums: Vec::new(),
                })
            }
        }
    }
    jackson_sum(ctx, lattice, &terms, DecayClass::Unrestricted)
}
