//! Summation engine for the 𝒥 and 𝒩 power series.
//!
//! Both series alternate and their terms first grow like `x^(2k)` before the
//! q-factorials take over, so at large arguments the result is many orders of
//! magnitude smaller than the largest term. The engine first plans the sum in
//! log space (largest term, where the terms peak), then either sums in double
//! precision or in software floats whose width is sized from that plan.

use crate::context::QContext;
use crate::error::{QError, Result};
use crate::ext::ExtReal;

/// Smallest software-float width used for any evaluation (about 51 digits).
pub const MIN_EXT_BITS: usize = 170;
/// Hard ceiling on software-float width.
pub const MAX_EXT_BITS: usize = 1 << 20;
/// Relative accuracy demanded of software-float results, in bits.
pub const TARGET_BITS: f64 = 69.0;
/// Values whose magnitude is below `2^UNDERFLOW_LOG2` are zero in double.
pub const UNDERFLOW_LOG2: f64 = -1100.0;

/// The argument of a series, kept symbolic so it can be rebuilt exactly at
/// whatever precision the evaluation ends up needing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Argument {
    /// `x` itself.
    Value(f64),
    /// `x = a·q^k` with `a = 1/(q⁻¹ − q)`: the lattice on which 𝒥 decays.
    Scaled(i64),
    /// `x² = p·q^(2j)` with the lattice point taken exactly.
    Lattice { p: f64, j: i64 },
    /// `x² = p·ρ` for a double `ρ`.
    Product { p: f64, rho: f64 },
}

impl Argument {
    pub fn is_zero(&self) -> bool {
        match *self {
            Argument::Value(x) => x == 0.0,
            Argument::Scaled(_) => false,
            Argument::Lattice { p, .. } => p == 0.0,
            Argument::Product { p, rho } => p == 0.0 || rho == 0.0,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let ok = match *self {
            Argument::Value(x) => x >= 0.0 && x.is_finite(),
            Argument::Scaled(_) => true,
            Argument::Lattice { p, .. } => p >= 0.0 && p.is_finite(),
            Argument::Product { p, rho } => {
                p >= 0.0 && rho >= 0.0 && p.is_finite() && rho.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(QError::Domain(format!(
                "series argument {self:?} must be finite and non-negative"
            )))
        }
    }

    /// `log2 x`.
    pub(crate) fn log2_x(&self, ctx: &QContext) -> f64 {
        let l2q = ctx.q().log2();
        match *self {
            Argument::Value(x) => x.log2(),
            Argument::Scaled(k) => ctx.bessel_scale().log2() + k as f64 * l2q,
            Argument::Lattice { p, j } => 0.5 * p.log2() + j as f64 * l2q,
            Argument::Product { p, rho } => 0.5 * (p.log2() + rho.log2()),
        }
    }

    pub(crate) fn x2_f64(&self, ctx: &QContext) -> f64 {
        match *self {
            Argument::Value(x) => x * x,
            Argument::Scaled(k) => {
                let a = ctx.bessel_scale() * ctx.qpow(k);
                a * a
            }
            Argument::Lattice { p, j } => p * crate::qcalc::lattice_point(ctx, j),
            Argument::Product { p, rho } => p * rho,
        }
    }

    /// `ln x²`, exactly linear in the lattice index for lattice arguments.
    pub(crate) fn ln_x2_f64(&self, ctx: &QContext) -> f64 {
        let lq = ctx.ln_q();
        match *self {
            Argument::Value(x) => 2.0 * x.ln(),
            Argument::Scaled(k) => 2.0 * ctx.bessel_scale().ln() + 2.0 * k as f64 * lq,
            Argument::Lattice { p, j } => p.ln() + 2.0 * j as f64 * lq,
            Argument::Product { p, rho } => p.ln() + rho.ln(),
        }
    }

    pub(crate) fn x_f64(&self, ctx: &QContext) -> f64 {
        match *self {
            Argument::Value(x) => x,
            Argument::Scaled(k) => ctx.bessel_scale() * ctx.qpow(k),
            _ => self.x2_f64(ctx).sqrt(),
        }
    }

    fn scale_ext(ctx: &QContext, bits: usize) -> ExtReal {
        let q = ExtReal::from_f64(ctx.q(), bits);
        &q / &(ExtReal::one(bits) - &q * &q)
    }

    pub(crate) fn x2_ext(&self, ctx: &QContext, bits: usize) -> ExtReal {
        let q = ExtReal::from_f64(ctx.q(), bits);
        match *self {
            Argument::Value(x) => {
                let x = ExtReal::from_f64(x, bits);
                &x * &x
            }
            Argument::Scaled(k) => {
                let x = Self::scale_ext(ctx, bits) * q.powi(k);
                &x * &x
            }
            Argument::Lattice { p, j } => ExtReal::from_f64(p, bits) * q.powi(2 * j),
            Argument::Product { p, rho } => {
                ExtReal::from_f64(p, bits) * ExtReal::from_f64(rho, bits)
            }
        }
    }

    pub(crate) fn x_ext(&self, ctx: &QContext, bits: usize) -> ExtReal {
        match *self {
            Argument::Value(x) => ExtReal::from_f64(x, bits),
            Argument::Scaled(k) => {
                Self::scale_ext(ctx, bits) * ExtReal::from_f64(ctx.q(), bits).powi(k)
            }
            _ => self.x2_ext(ctx, bits).sqrt(),
        }
    }

    pub(crate) fn ln_x2_ext(&self, ctx: &QContext, bits: usize) -> ExtReal {
        let lq = ExtReal::from_f64(ctx.q(), bits).ln();
        match *self {
            Argument::Value(_) | Argument::Product { .. } => self.x2_ext(ctx, bits).ln(),
            Argument::Scaled(k) => {
                let two = ExtReal::from_i64(2, bits);
                &two * &Self::scale_ext(ctx, bits).ln() + ExtReal::from_i64(2 * k, bits) * lq
            }
            Argument::Lattice { p, j } => {
                ExtReal::from_f64(p, bits).ln() + ExtReal::from_i64(2 * j, bits) * lq
            }
        }
    }
}

/// Which series to sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Kind {
    /// `𝒥_s(x) = q^(−s(|s|+1)/2)·Σ_k (−1)^k q^(−s·k) x^(2k+|s|) / ([k]!·[k+|s|]!)`.
    Bessel { s: i64 },
    /// `𝒩(x; c) = A·𝒥(x)·(ln x² + 2c) − q⁻¹·Σ_(k≥1)(−1)^k x^(2k)/([k]!)²·H_k`,
    /// `A = (q − q⁻¹)/(2q ln q)`, `H_k = Σ_(m≤k)(q^m + q^(−m))/[m]`.
    Neumann { c_q: f64 },
}

/// Exponent of the constant `q^(−s(|s|+1)/2)` in front of `𝒥_s`, which
/// makes every `e_ts` a unit vector.
pub(crate) fn order_norm_exponent(s: i64) -> i64 {
    -(s * (s.abs() + 1)) / 2
}

/// log2 of the symmetric q-number `[i]`, `i ≥ 1`.
fn log2_qnum(l2q: f64, q2: f64, d_log2: f64, i: f64) -> f64 {
    -i * l2q + (1.0 - q2.powf(i)).log2() - d_log2
}

/// Outcome of the log-space plan: largest term and where the terms peak.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Plan {
    pub max_log2: f64,
    pub peak: usize,
    pub s_abs: i64,
    pub s: i64,
    pub lx: f64,
    pub norm_log2: f64,
}

impl Plan {
    pub(crate) fn new(ctx: &QContext, kind: Kind, arg: &Argument) -> Result<Plan> {
        let s = match kind {
            Kind::Bessel { s } => s,
            Kind::Neumann { .. } => 0,
        };
        let sa = s.abs();
        let lx = arg.log2_x(ctx);
        let l2q = ctx.q().log2();
        let q2 = ctx.q2();
        let d_log2 = (1.0 / ctx.q() - ctx.q()).log2();
        let mut lfact_k = 0.0;
        let mut lfact_ks = (1..=sa)
            .map(|i| log2_qnum(l2q, q2, d_log2, i as f64))
            .sum::<f64>();
        let norm_log2 = order_norm_exponent(s) as f64 * l2q;
        let mut lt = sa as f64 * lx - lfact_ks + norm_log2;
        let mut h = 0.0;
        let mut best = lt;
        let mut peak = 0;
        let mut k = 0usize;
        loop {
            k += 1;
            if k > ctx.max_terms() {
                return Err(QError::Precision {
                    cancellation: f64::INFINITY,
                    detail: format!(
                        "series needs more than max_terms = {} terms",
                        ctx.max_terms()
                    ),
                });
            }
            let kf = k as f64;
            lfact_k += log2_qnum(l2q, q2, d_log2, kf);
            lfact_ks += log2_qnum(l2q, q2, d_log2, kf + sa as f64);
            lt = norm_log2 + sa as f64 * lx + kf * (2.0 * lx - s as f64 * l2q) - lfact_k - lfact_ks;
            let weight = if matches!(kind, Kind::Neumann { .. }) {
                h += (1.0 + q2.powf(kf)) / (1.0 - q2.powf(kf)) * (1.0 / ctx.q() - ctx.q());
                h.log2()
            } else {
                0.0
            };
            if lt + weight > best {
                best = lt + weight;
                peak = k;
            }
            if k > peak + 2 && lt + weight < best - 64.0 {
                break;
            }
        }
        Ok(Plan {
            max_log2: best,
            peak,
            s_abs: sa,
            s,
            lx,
            norm_log2,
        })
    }

    /// Predicted log2 of term `k` (without the harmonic weight).
    fn term_log2(&self, ctx: &QContext, k: usize, lfact_k: f64, lfact_ks: f64) -> f64 {
        let kf = k as f64;
        self.norm_log2
            + self.s_abs as f64 * self.lx
            + kf * (2.0 * self.lx - self.s as f64 * ctx.q().log2())
            - lfact_k
            - lfact_ks
    }
}

/// Result of a double-precision summation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DoubleSum {
    pub value: f64,
    pub terms_used: usize,
    pub cancellation: f64,
    pub error_bound: f64,
}

pub(crate) fn sum_double(ctx: &QContext, kind: Kind, arg: &Argument) -> Option<DoubleSum> {
    let q = ctx.q();
    let qi = 1.0 / q;
    let d = qi - q;
    let (s, c_q) = match kind {
        Kind::Bessel { s } => (s, 0.0),
        Kind::Neumann { c_q } => (0, c_q),
    };
    let sa = s.abs();
    let x2 = arg.x2_f64(ctx);
    let mult = -x2 * ctx.qpow(-s);
    let mut t = if sa == 0 {
        1.0
    } else {
        arg.x_f64(ctx).powi(sa as i32) * ctx.qpow(order_norm_exponent(s))
    };
    let (mut qk, mut qmk) = (1.0, 1.0);
    let (mut qks, mut qmks) = (1.0, 1.0);
    for _ in 0..sa {
        qks *= q;
        qmks *= qi;
        t /= (qmks - qks) / d;
    }
    let mut sum = t;
    let mut hsum = 0.0;
    let mut h = 0.0;
    let mut max_partial = sum.abs();
    let mut max_h = 0.0f64;
    let mut prev = t.abs();
    let mut k = 0usize;
    let tol = ctx.series_tol();
    loop {
        k += 1;
        if k > ctx.max_terms() || !t.is_finite() {
            return None;
        }
        qk *= q;
        qmk *= qi;
        qks *= q;
        qmks *= qi;
        let bk = (qmk - qk) / d;
        let bks = (qmks - qks) / d;
        t = t * mult / (bk * bks);
        sum += t;
        max_partial = max_partial.max(sum.abs());
        if matches!(kind, Kind::Neumann { .. }) {
            h += (qk + qmk) / bk;
            hsum += t * h;
            max_h = max_h.max(hsum.abs());
        }
        let mag = t.abs();
        let scale = sum.abs().max(hsum.abs());
        if (mag < tol * scale && mag < prev) || (mag == 0.0 && k > 1) {
            break;
        }
        prev = mag;
    }
    if !sum.is_finite() || !hsum.is_finite() {
        return None;
    }
    let eps = f64::EPSILON;
    let n = k as f64;
    let (value, cancellation, error_bound) = match kind {
        Kind::Bessel { .. } => {
            let c = if sum == 0.0 {
                f64::INFINITY
            } else {
                (max_partial / sum.abs()).max(1.0)
            };
            (
                sum,
                c,
                n * eps * max_partial + prev.min(t.abs()) + eps * sum.abs(),
            )
        }
        Kind::Neumann { .. } => {
            let a = ctx.log_prefactor();
            let lg = arg.ln_x2_f64(ctx) + 2.0 * c_q;
            let first = a * sum * lg;
            let second = hsum / q;
            let v = first - second;
            let big = (a * max_partial * lg.abs())
                .max(max_h / q)
                .max(first.abs())
                .max(second.abs());
            let c = if v == 0.0 {
                f64::INFINITY
            } else {
                (big / v.abs()).max(1.0)
            };
            (
                v,
                c,
                (n + 4.0) * eps * big + t.abs() * (a * lg.abs() + n / q),
            )
        }
    };
    if !value.is_finite() {
        return None;
    }
    Some(DoubleSum {
        value,
        terms_used: k + 1,
        cancellation,
        error_bound,
    })
}

/// Result of a software-float summation.
#[derive(Debug, Clone)]
pub struct ExtSeries {
    pub value: ExtReal,
    pub terms_used: usize,
    /// log2 of the largest term encountered (the cancellation scale).
    pub max_term_log2: f64,
    /// log2 of the absolute error bound.
    pub error_log2: f64,
    pub bits: usize,
}

impl ExtSeries {
    pub fn cancellation(&self) -> f64 {
        let v = self.value.log2_abs();
        2f64.powf((self.max_term_log2 - v).max(0.0))
    }

    pub fn error_bound(&self) -> f64 {
        2f64.powf(self.error_log2)
    }
}

fn sum_ext_at(ctx: &QContext, kind: Kind, arg: &Argument, plan: &Plan, bits: usize) -> ExtSeries {
    let q = ExtReal::from_f64(ctx.q(), bits);
    let qi = q.recip();
    let d = &qi - &q;
    let sa = plan.s_abs;
    let x2 = arg.x2_ext(ctx, bits);
    let mult = -(&x2 * &q.powi(-plan.s));
    let mut t = if sa == 0 {
        ExtReal::one(bits)
    } else {
        arg.x_ext(ctx, bits).powi(sa) * q.powi(order_norm_exponent(plan.s))
    };
    let one = ExtReal::one(bits);
    let (mut qk, mut qmk) = (one.clone(), one.clone());
    let (mut qks, mut qmks) = (one.clone(), one.clone());
    let l2q = ctx.q().log2();
    let q2f = ctx.q2();
    let d_log2 = (1.0 / ctx.q() - ctx.q()).log2();
    let mut lfact_k = 0.0;
    let mut lfact_ks = 0.0;
    for i in 1..=sa {
        qks = &qks * &q;
        qmks = &qmks * &qi;
        t = &t / &((&qmks - &qks) / &d);
        lfact_ks += log2_qnum(l2q, q2f, d_log2, i as f64);
    }
    let neumann = matches!(kind, Kind::Neumann { .. });
    let mut sum = t.clone();
    let mut hsum = ExtReal::zero(bits);
    let mut h = ExtReal::zero(bits);
    let cutoff = plan.max_log2 - bits as f64 - 8.0;
    let mut k = 0usize;
    loop {
        k += 1;
        let kf = k as f64;
        lfact_k += log2_qnum(l2q, q2f, d_log2, kf);
        lfact_ks += log2_qnum(l2q, q2f, d_log2, kf + sa as f64);
        qk = &qk * &q;
        qmk = &qmk * &qi;
        qks = &qks * &q;
        qmks = &qmks * &qi;
        let bk = (&qmk - &qk) / &d;
        let bks = if sa == 0 {
            bk.clone()
        } else {
            (&qmks - &qks) / &d
        };
        t = &(&t * &mult) / &(&bk * &bks);
        sum = &sum + &t;
        if neumann {
            h = &h + &(&(&qk + &qmk) / &bk);
            hsum = &hsum + &(&t * &h);
        }
        let lt = plan.term_log2(ctx, k, lfact_k, lfact_ks);
        if (k > plan.peak + 1 && lt + (kf + 2.0).log2() + 8.0 < cutoff) || t.is_zero() {
            break;
        }
    }
    let rounding = plan.max_log2 - bits as f64 + ((k + 4) as f64).log2() + 2.0;
    match kind {
        Kind::Bessel { .. } => ExtSeries {
            value: sum,
            terms_used: k + 1,
            max_term_log2: plan.max_log2,
            error_log2: rounding,
            bits,
        },
        Kind::Neumann { c_q } => {
            let lq = q.ln();
            let two = ExtReal::from_i64(2, bits);
            let a = &(&q - &qi) / &(&(&two * &q) * &lq);
            let lg = arg.ln_x2_ext(ctx, bits) + &two * &ExtReal::from_f64(c_q, bits);
            let first = &(&a * &sum) * &lg;
            let second = &hsum / &q;
            let amp = (a.abs() * lg.abs()).to_f64().abs() + 1.0 / ctx.q() + 1.0;
            let value = &first - &second;
            ExtSeries {
                value,
                terms_used: k + 1,
                max_term_log2: plan.max_log2 + amp.log2(),
                error_log2: rounding + amp.log2() + 1.0,
                bits,
            }
        }
    }
}

/// Software-float evaluation with adaptive width.
///
/// The result carries at least [`TARGET_BITS`] correct bits unless its
/// magnitude is below `2^floor_log2`, in which case only the absolute error
/// is guaranteed to be below that floor.
pub(crate) fn sum_ext(
    ctx: &QContext,
    kind: Kind,
    arg: &Argument,
    floor_log2: f64,
) -> Result<ExtSeries> {
    arg.validate()?;
    if arg.is_zero() {
        let bits = MIN_EXT_BITS;
        return match kind {
            Kind::Bessel { s } => Ok(ExtSeries {
                value: ExtReal::from_i64(if s == 0 { 1 } else { 0 }, bits),
                terms_used: 1,
                max_term_log2: 0.0,
                error_log2: f64::NEG_INFINITY,
                bits,
            }),
            Kind::Neumann { .. } => Err(QError::Domain("𝒩 is singular at the origin".into())),
        };
    }
    let plan = Plan::new(ctx, kind, arg)?;
    let mut bits = ((plan.max_log2.max(0.0) + TARGET_BITS + 64.0) as usize).max(MIN_EXT_BITS);
    loop {
        let r = sum_ext_at(ctx, kind, arg, &plan, bits);
        let v = r.value.log2_abs();
        let good = v - r.error_log2;
        if good >= TARGET_BITS || r.error_log2 < floor_log2 - 8.0 {
            return Ok(r);
        }
        let next = if good > 4.0 {
            bits + (TARGET_BITS - good + 32.0) as usize
        } else if floor_log2.is_finite() {
            (bits * 2)
                .min(((plan.max_log2 - floor_log2 + TARGET_BITS + 32.0).max(0.0)) as usize)
                .max(bits + 64)
        } else {
            bits * 2
        };
        if next > MAX_EXT_BITS {
            return Err(QError::Precision {
                cancellation: r.cancellation(),
                detail: format!("more than {MAX_EXT_BITS} bits needed at {arg:?}"),
            });
        }
        bits = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_peaks_where_terms_turn() {
        let ctx = QContext::new(0.5).unwrap();
        let p = Plan::new(&ctx, Kind::Bessel { s: 0 }, &Argument::Value(1.0)).unwrap();
        assert_eq!(p.peak, 0);
        let p = Plan::new(&ctx, Kind::Bessel { s: 0 }, &Argument::Value(1e6)).unwrap();
        assert!(p.peak > 5 && p.max_log2 > 100.0);
    }

    #[test]
    fn double_and_ext_agree_at_moderate_arguments() {
        let ctx = QContext::new(0.7).unwrap();
        for &x in &[0.1, 0.5, 1.0, 1.7] {
            let d = sum_double(&ctx, Kind::Bessel { s: 0 }, &Argument::Value(x)).unwrap();
            let e = sum_ext(
                &ctx,
                Kind::Bessel { s: 0 },
                &Argument::Value(x),
                UNDERFLOW_LOG2,
            )
            .unwrap();
            assert!((d.value - e.value.to_f64()).abs() <= 4.0 * d.error_bound.max(1e-16));
            let dn = sum_double(&ctx, Kind::Neumann { c_q: 0.3 }, &Argument::Value(x)).unwrap();
            let en = sum_ext(
                &ctx,
                Kind::Neumann { c_q: 0.3 },
                &Argument::Value(x),
                UNDERFLOW_LOG2,
            )
            .unwrap();
            assert!(
                (dn.value - en.value.to_f64()).abs() <= 4.0 * dn.error_bound.max(1e-16),
                "{x}"
            );
        }
    }
}
