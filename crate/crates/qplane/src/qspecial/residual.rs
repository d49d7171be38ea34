//! Pointwise residuals of `(□ + p)f = 0` for the homogeneous solutions,
//! computed entirely in software floats on exact lattice points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::series::{sum_ext, Argument, Kind};
use crate::context::QContext;
use crate::error::{QError, Result};
use crate::ext::ExtReal;

/// Which homogeneous solution to test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Solution {
    Bessel,
    Neumann { c_q: f64 },
}

/// Residual of the difference equation at one lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub j: i64,
    /// `|(□+p)f(ρ_j)|` relative to the sum of the magnitudes of the
    /// stencil contributions and `|p·f(ρ_j)|`.
    pub relative: f64,
}

/// Relative residuals of `(□ + p)f` at `j_lo..=j_hi` for `f(ρ) = 𝒥(√(pρ))`
/// or `𝒩(√(pρ))`, with `ρ_j = q^(2j)` exact.
pub fn helmholtz_residuals(
    ctx: &QContext,
    which: Solution,
    p: f64,
    j_lo: i64,
    j_hi: i64,
) -> Result<Vec<ResidualPoint>> {
    if !(p > 0.0 && p.is_finite()) || j_lo > j_hi {
        return Err(QError::InvalidParameter(format!(
            "residual check with p = {p}, [{j_lo}, {j_hi}]"
        )));
    }
    let kind = match which {
        Solution::Bessel => Kind::Bessel { s: 0 },
        Solution::Neumann { c_q } => Kind::Neumann { c_q },
    };
    let values = ((j_lo - 1)..=(j_hi + 1))
        .into_par_iter()
        .map(|j| sum_ext(ctx, kind, &Argument::Lattice { p, j }, f64::NEG_INFINITY))
        .collect::<Result<Vec<_>>>()?;
    let bits = values.iter().map(|v| v.bits).max().unwrap_or(128) + 64;
    let q = ExtReal::from_f64(ctx.q(), bits);
    let q2 = &q * &q;
    let one = ExtReal::one(bits);
    let omq2 = &one - &q2;
    let c = &q2 / &(&omq2 * &omq2);
    let pe = ExtReal::from_f64(p, bits);
    let two = ExtReal::from_i64(2, bits);
    let out = (j_lo..=j_hi)
        .map(|j| {
            let i = (j - j_lo + 1) as usize;
            let (fm, f0, fp) = (&values[i - 1].value, &values[i].value, &values[i + 1].value);
            let k = &c / &q2.powi(j);
            let stencil = &(&(fp + fm) - &(&two * f0)) * &k;
            let helm = &pe * f0;
            let r = &stencil + &helm;
            let scale_l2 = {
                let mags = [fp.log2_abs(), fm.log2_abs(), f0.log2_abs() + 1.0];
                let km = k.log2_abs();
                let m = mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = mags.iter().map(|v| (v - m).exp2()).sum();
                let st = m + s.log2() + km;
                let h = helm.log2_abs();
                let mm = st.max(h);
                mm + ((st - mm).exp2() + (h - mm).exp2()).log2()
            };
            let rel = if r.is_zero() {
                0.0
            } else {
                (r.log2_abs() - scale_l2).exp2()
            };
            ResidualPoint { j, relative: rel }
        })
        .collect();
    Ok(out)
}
