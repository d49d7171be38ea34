//! q-lattice calculus: q-numbers, Jackson integration on `{q^(2j)}`,
//! the q-difference operators and the radial Casimir `□ = D₋ρD₊`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::context::QContext;
use crate::error::{QError, Result};

/// Finite window `j_min..=j_max` of the lattice `ρ_j = q^(2j)`.
///
/// Points are generated by repeated multiplication starting from `ρ_0 = 1`
/// (by `q²` towards larger `j`, by the rounded `q⁻²` towards smaller `j`),
/// so a given `ρ_j` has the same bits in every window that contains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QLattice {
    j_min: i64,
    j_max: i64,
    points: Vec<f64>,
}

/// `ρ_j` by the same walk used to build windows.
pub fn lattice_point(ctx: &QContext, j: i64) -> f64 {
    let (step, n) = if j >= 0 {
        (ctx.q2(), j)
    } else {
        (1.0 / ctx.q2(), -j)
    };
    let mut v = 1.0;
    for _ in 0..n {
        v *= step;
    }
    v
}

impl QLattice {
    pub fn new(ctx: &QContext, j_min: i64, j_max: i64) -> Result<Self> {
        if j_min >= j_max {
            return Err(QError::Window(format!(
                "empty lattice window [{j_min}, {j_max}]"
            )));
        }
        let anchor = 0i64.clamp(j_min, j_max);
        let n = (j_max - j_min + 1) as usize;
        let mut points = vec![0.0; n];
        let a = (anchor - j_min) as usize;
        points[a] = lattice_point(ctx, anchor);
        let up = ctx.q2();
        let down = 1.0 / ctx.q2();
        for i in a + 1..n {
            points[i] = points[i - 1] * up;
        }
        for i in (0..a).rev() {
            points[i] = points[i + 1] * down;
        }
        if points.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(QError::Window(format!(
                "lattice window [{j_min}, {j_max}] leaves the double range at q = {}",
                ctx.q()
            )));
        }
        Ok(QLattice {
            j_min,
            j_max,
            points,
        })
    }

    /// Window `-half..=half`.
    pub fn symmetric(ctx: &QContext, half: i64) -> Result<Self> {
        Self::new(ctx, -half, half)
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn j_max(&self) -> i64 {
        self.j_max
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, j: i64) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    /// `ρ_j`, panicking outside the window.
    pub fn rho(&self, j: i64) -> f64 {
        self.points[(j - self.j_min) as usize]
    }

    /// Points ordered by increasing `j` (decreasing `ρ`).
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.j_min..=self.j_max
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.indices().zip(self.points.iter().copied())
    }

    /// Sub-window; the retained points keep their bits.
    pub fn restrict(&self, j_min: i64, j_max: i64) -> Result<Self> {
        if j_min >= j_max || j_min < self.j_min || j_max > self.j_max {
            return Err(QError::Window(format!(
                "[{j_min}, {j_max}] is not a proper sub-window of [{}, {}]",
                self.j_min, self.j_max
            )));
        }
        let lo = (j_min - self.j_min) as usize;
        let hi = (j_max - self.j_min) as usize;
        Ok(QLattice {
            j_min,
            j_max,
            points: self.points[lo..=hi].to_vec(),
        })
    }
}

/// How fast a sampled function dies at the window ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    CompactSupport,
    Summable,
    Unrestricted,
}

/// Complex samples on a lattice window plus the value at `ρ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    lattice: QLattice,
    samples: Vec<Complex64>,
    zero_limit: Option<Complex64>,
    decay: DecayClass,
}

impl RadialFunction {
    pub fn new(lattice: QLattice, samples: Vec<Complex64>, decay: DecayClass) -> Result<Self> {
        if samples.len() != lattice.len() {
            return Err(QError::Window(format!(
                "{} samples for a window of {} points",
                samples.len(),
                lattice.len()
            )));
        }
        if samples
            .iter()
            .any(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(QError::Domain("non-finite sample".into()));
        }
        Ok(RadialFunction {
            lattice,
            samples,
            zero_limit: None,
            decay,
        })
    }

    pub fn from_fn(
        lattice: &QLattice,
        decay: DecayClass,
        mut f: impl FnMut(i64, f64) -> Complex64,
    ) -> Result<Self> {
        let samples = lattice.iter().map(|(j, r)| f(j, r)).collect();
        Self::new(lattice.clone(), samples, decay)
    }

    pub fn from_real_fn(
        lattice: &QLattice,
        decay: DecayClass,
        mut f: impl FnMut(f64) -> f64,
    ) -> Result<Self> {
        Self::from_fn(lattice, decay, |_, r| Complex64::new(f(r), 0.0))
    }

    /// Indicator of the single lattice point `j`.
    pub fn indicator(lattice: &QLattice, j: i64) -> Result<Self> {
        if !lattice.contains(j) {
            return Err(QError::Window(format!("point {j} outside the window")));
        }
        let mut f = Self::from_fn(lattice, DecayClass::CompactSupport, |k, _| {
            Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0)
        })?;
        f.zero_limit = Some(Complex64::new(0.0, 0.0));
        Ok(f)
    }

    /// `ln ρ`, sampled as `2j·ln q` so that it is exactly linear in `j`.
    pub fn log_rho(ctx: &QContext, lattice: &QLattice) -> Result<Self> {
        let lq = ctx.ln_q();
        Self::from_fn(lattice, DecayClass::Unrestricted, |j, _| {
            Complex64::new(2.0 * j as f64 * lq, 0.0)
        })
    }

    pub fn with_zero_limit(mut self, v: Complex64) -> Self {
        self.zero_limit = Some(v);
        self
    }

    pub fn lattice(&self) -> &QLattice {
        &self.lattice
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn decay(&self) -> DecayClass {
        self.decay
    }

    pub fn zero_limit(&self) -> Option<Complex64> {
        self.zero_limit
    }

    pub fn at(&self, j: i64) -> Option<Complex64> {
        if self.lattice.contains(j) {
            Some(self.samples[(j - self.lattice.j_min) as usize])
        } else {
            None
        }
    }

    pub fn restrict(&self, j_min: i64, j_max: i64) -> Result<Self> {
        let lattice = self.lattice.restrict(j_min, j_max)?;
        let lo = (j_min - self.lattice.j_min) as usize;
        let hi = (j_max - self.lattice.j_min) as usize;
        Ok(RadialFunction {
            lattice,
            samples: self.samples[lo..=hi].to_vec(),
            zero_limit: self.zero_limit,
            decay: self.decay,
        })
    }

    /// Pointwise map keeping window and decay class; the zero limit is
    /// mapped too when known.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        RadialFunction {
            lattice: self.lattice.clone(),
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            zero_limit: self.zero_limit.map(&f),
            decay: self.decay,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    fn zip_with(
        &self,
        other: &RadialFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.lattice.j_min != other.lattice.j_min || self.lattice.j_max != other.lattice.j_max {
            return Err(QError::Window("functions live on different windows".into()));
        }
        Ok(RadialFunction {
            lattice: self.lattice.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            zero_limit: match (self.zero_limit, other.zero_limit) {
                (Some(a), Some(b)) => Some(f(a, b)),
                _ => None,
            },
            decay: self.decay.min(other.decay),
        })
    }

    pub fn add(&self, other: &RadialFunction) -> Result<Self> {
        let mut r = self.zip_with(other, |a, b| a + b)?;
        r.decay = self.decay.max(other.decay);
        Ok(r)
    }

    pub fn sub(&self, other: &RadialFunction) -> Result<Self> {
        let mut r = self.zip_with(other, |a, b| a - b)?;
        r.decay = self.decay.max(other.decay);
        Ok(r)
    }

    /// Pointwise product; decays as fast as the faster factor.
    pub fn mul(&self, other: &RadialFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Largest sample magnitude.
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// A windowed pairing together with an estimate of what the window missed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPairing {
    pub value: Complex64,
    pub truncation_estimate: f64,
}

/// Symmetric q-number `[m] = (q^m − q^(−m))/(q − q⁻¹)`.
pub fn q_number(ctx: &QContext, m: i64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let q = ctx.q();
    let n = m.unsigned_abs().min(i32::MAX as u64) as i32;
    // (q^(-n) - q^n)/(q^(-1) - q) has no cancellation for 0 < q < 1
    let v = (q.powi(-n) - q.powi(n)) / (1.0 / q - q);
    if m < 0 {
        -v
    } else {
        v
    }
}

/// `[m]! = [1][2]…[m]`.
pub fn q_factorial(ctx: &QContext, m: i64) -> Result<f64> {
    if m < 0 {
        return Err(QError::Domain(format!(
            "q-factorial of negative argument {m}"
        )));
    }
    Ok((1..=m).map(|k| q_number(ctx, k)).product())
}

/// Estimate of the unseen tail beyond one window end, from the three
/// outermost weighted terms ordered edge first.
fn end_tail(edge: &[f64]) -> (f64, bool) {
    let ratio = |a: f64, b: f64| {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a / b
        }
    };
    match edge {
        [e0, e1, e2, ..] => {
            let r = ratio(*e0, *e1).max(ratio(*e1, *e2));
            if r < 1.0 {
                (e0 * r / (1.0 - r), true)
            } else {
                (0.0, false)
            }
        }
        _ => (0.0, false),
    }
}

/// Windowed Jackson sum with the tail estimate split by end.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitSum {
    pub value: Complex64,
    /// Estimated tail beyond the large-ρ (small `j`) end.
    pub large_rho_tail: f64,
    /// Estimated tail beyond the small-ρ (large `j`) end.
    pub small_rho_tail: f64,
}

/// Shared summation behind every weighted pairing on the lattice:
/// `(1−q²)·Σ_j ρ_j·terms_j`, summed in increasing `j`.
pub(crate) fn jackson_sum_split(
    ctx: &QContext,
    lattice: &QLattice,
    terms: &[Complex64],
    decay: DecayClass,
) -> Result<SplitSum> {
    let w = 1.0 - ctx.q2();
    let weighted: Vec<Complex64> = lattice
        .points()
        .iter()
        .zip(terms)
        .map(|(&r, &t)| t * (w * r))
        .collect();
    let mut value = Complex64::new(0.0, 0.0);
    for t in &weighted {
        value += t;
    }
    let mags: Vec<f64> = weighted.iter().map(|t| t.norm()).collect();
    let n = mags.len();
    let band = (n / 10).max(1);
    let scale = value
        .norm()
        .max(mags.iter().cloned().fold(0.0, f64::max) * f64::EPSILON);

    let mut tails = [0.0; 2];
    let mut diverging = Vec::new();
    let low_end: Vec<f64> = mags.iter().take(3).copied().collect();
    let high_end: Vec<f64> = mags.iter().rev().take(3).copied().collect();
    for (slot, (name, edge, band_sum)) in [
        ("large-ρ", low_end, mags[..band].iter().sum::<f64>()),
        ("small-ρ", high_end, mags[n - band..].iter().sum::<f64>()),
    ]
    .into_iter()
    .enumerate()
    {
        let (tail, geometric) = end_tail(&edge);
        if geometric {
            tails[slot] = tail;
        } else {
            tails[slot] = band_sum;
            if band_sum > ctx.series_tol() * scale {
                diverging.push(name);
            }
        }
    }
    if decay == DecayClass::Unrestricted && !diverging.is_empty() {
        let mut partial_sums = Vec::with_capacity(n);
        let mut acc = Complex64::new(0.0, 0.0);
        for t in weighted.iter().rev() {
            acc += t;
            partial_sums.push(acc);
        }
        return Err(QError::Divergence {
            detail: format!(
                "weighted terms do not decay at the {} end of [{}, {}]",
                diverging.join(" and "),
                lattice.j_min(),
                lattice.j_max()
            ),
            partial: value,
            partial_sums,
        });
    }
    Ok(SplitSum {
        value,
        large_rho_tail: tails[0],
        small_rho_tail: tails[1],
    })
}

pub(crate) fn jackson_sum(
    ctx: &QContext,
    lattice: &QLattice,
    terms: &[Complex64],
    decay: DecayClass,
) -> Result<WeightedPairing> {
    let s = jackson_sum_split(ctx, lattice, terms, decay)?;
    Ok(WeightedPairing {
        value: s.value,
        truncation_estimate: s.large_rho_tail + s.small_rho_tail,
    })
}

/// Jackson integral `(1−q²)·Σ_j q^(2j)·f(q^(2j))` over the window of `f`.
pub fn jackson_integral(ctx: &QContext, f: &RadialFunction) -> Result<WeightedPairing> {
    jackson_sum(ctx, &f.lattice, &f.samples, f.decay)
}

/// `(f, g)_A = (1−q²)·Σ_j q^(2j)·conj(f_j)·g_j`.
pub fn pairing_h(
    ctx: &QContext,
    f: &RadialFunction,
    g: &RadialFunction,
) -> Result<WeightedPairing> {
    if f.lattice.j_min != g.lattice.j_min || f.lattice.j_max != g.lattice.j_max {
        return Err(QError::Window(format!(
            "pairing of functions on [{}, {}] and [{}, {}]",
            f.lattice.j_min, f.lattice.j_max, g.lattice.j_min, g.lattice.j_max
        )));
    }
    let terms: Vec<Complex64> = f
        .samples
        .iter()
        .zip(&g.samples)
        .map(|(a, b)| a.conj() * b)
        .collect();
    jackson_sum(ctx, &f.lattice, &terms, f.decay.min(g.decay))
}

fn shrunk(f: &RadialFunction, lo: i64, hi: i64, what: &str) -> Result<QLattice> {
    let (j_min, j_max) = (f.lattice.j_min + lo, f.lattice.j_max - hi);
    if j_min >= j_max {
        return Err(QError::Window(format!(
            "{what} needs more points than the window [{}, {}] has",
            f.lattice.j_min, f.lattice.j_max
        )));
    }
    f.lattice.restrict(j_min, j_max)
}

fn with_estimated_zero(ctx: &QContext, mut f: RadialFunction) -> RadialFunction {
    f.zero_limit = estimate_zero_limit(ctx, &f).ok();
    f
}

/// `(D₊f)(ρ_j) = (f(ρ_j) − f(ρ_(j+1)))/((1−q²)ρ_j)`; drops the last point.
pub fn d_plus(ctx: &QContext, f: &RadialFunction) -> Result<RadialFunction> {
    let lat = shrunk(f, 0, 1, "D₊")?;
    let c = 1.0 - ctx.q2();
    let s = &f.samples;
    let samples = (0..lat.len())
        .map(|i| (s[i] - s[i + 1]) / (c * lat.points()[i]))
        .collect();
    Ok(with_estimated_zero(
        ctx,
        RadialFunction {
            lattice: lat,
            samples,
            zero_limit: None,
            decay: f.decay,
        },
    ))
}

/// `(D₋f)(ρ_j) = (f(ρ_j) − f(ρ_(j−1)))/((1−q⁻²)ρ_j)`; drops the first point.
pub fn d_minus(ctx: &QContext, f: &RadialFunction) -> Result<RadialFunction> {
    let lat = shrunk(f, 1, 0, "D₋")?;
    let c = 1.0 - 1.0 / ctx.q2();
    let s = &f.samples;
    let samples = (0..lat.len())
        .map(|i| (s[i + 1] - s[i]) / (c * lat.points()[i]))
        .collect();
    Ok(with_estimated_zero(
        ctx,
        RadialFunction {
            lattice: lat,
            samples,
            zero_limit: None,
            decay: f.decay,
        },
    ))
}

/// Multiplication by `ρ`.
pub fn times_rho(f: &RadialFunction) -> RadialFunction {
    let samples = f
        .samples
        .iter()
        .zip(f.lattice.points())
        .map(|(v, r)| v * r)
        .collect();
    RadialFunction {
        lattice: f.lattice.clone(),
        samples,
        zero_limit: Some(Complex64::new(0.0, 0.0)),
        decay: f.decay,
    }
}

/// `□f = D₋(ρ·D₊f)`, composed from the difference operators. The result
/// lives on the window with one point removed at each end.
pub fn box_op(ctx: &QContext, f: &RadialFunction) -> Result<RadialFunction> {
    shrunk(f, 1, 1, "□")?;
    let g = times_rho(&d_plus(ctx, f)?);
    d_minus(ctx, &g)
}

/// `□f` from the expanded three-point stencil
/// `q²(f_(j+1) + f_(j−1) − 2f_j)/((1−q²)²ρ_j)`.
pub fn box_stencil(ctx: &QContext, f: &RadialFunction) -> Result<RadialFunction> {
    let lat = shrunk(f, 1, 1, "□")?;
    let q2 = ctx.q2();
    let c = q2 / ((1.0 - q2) * (1.0 - q2));
    let s = &f.samples;
    let samples = (0..lat.len())
        .map(|i| (s[i + 2] + s[i] - s[i + 1] * 2.0) * (c / lat.points()[i]))
        .collect();
    Ok(with_estimated_zero(
        ctx,
        RadialFunction {
            lattice: lat,
            samples,
            zero_limit: None,
            decay: f.decay,
        },
    ))
}

/// `f(0)` extrapolated from the three smallest-ρ samples.
///
/// The successive differences must shrink by at least `q²(1+series_tol)`
/// (with an allowance for rounding noise in the samples); the geometric
/// remainder `d·q²/(1−q²)` is then added to the deepest sample.
pub fn estimate_zero_limit(ctx: &QContext, f: &RadialFunction) -> Result<Complex64> {
    let n = f.samples.len();
    if n < 3 {
        return Err(QError::Extrapolation("fewer than three samples".into()));
    }
    let (a, b, c) = (f.samples[n - 3], f.samples[n - 2], f.samples[n - 1]);
    let d1 = b - a;
    let d2 = c - b;
    let q2 = ctx.q2();
    let noise = 4.0 * f64::EPSILON * (a.norm() + b.norm() + c.norm());
    if d2.norm() > q2 * (1.0 + ctx.series_tol()) * d1.norm() + noise {
        return Err(QError::Extrapolation(format!(
            "differences {:.3e} then {:.3e} at the small-ρ edge do not contract by q²",
            d1.norm(),
            d2.norm()
        )));
    }
    Ok(c + d2 * (q2 / (1.0 - q2)))
}

/// `(δ, f)_A = f(0)`.
pub fn delta_pairing(ctx: &QContext, f: &RadialFunction) -> Result<Complex64> {
    match f.zero_limit {
        Some(v) => Ok(v),
        None => estimate_zero_limit(ctx, f),
    }
}

/// `(g, (□ + p)f)_A` over the interior window where `□f` is defined.
pub fn weak_helmholtz_pairing(
    ctx: &QContext,
    g: &RadialFunction,
    f: &RadialFunction,
    p: f64,
) -> Result<WeightedPairing> {
    let bf = box_op(ctx, f)?;
    let (lo, hi) = (bf.lattice.j_min, bf.lattice.j_max);
    if !(g.lattice.contains(lo) && g.lattice.contains(hi)) {
        return Err(QError::Window(
            "g does not cover the interior of f's window".into(),
        ));
    }
    let fi = f.restrict(lo, hi)?;
    let lhs = if p == 0.0 {
        bf
    } else {
        bf.add(&fi.scale(Complex64::new(p, 0.0)))?
    };
    let mut lhs = lhs;
    lhs.decay = f.decay;
    pairing_h(ctx, &g.restrict(lo, hi)?, &lhs)
}

/// `(g, □f)_A`, the weak form of `(□g, f)_A`.
pub fn weak_box_pairing(
    ctx: &QContext,
    g: &RadialFunction,
    f: &RadialFunction,
) -> Result<WeightedPairing> {
    weak_helmholtz_pairing(ctx, g, f, 0.0)
}
