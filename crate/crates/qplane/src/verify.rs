//! Self-checks grouped in suites, each reporting its largest residual
//! against a tolerance.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::context::{PrecisionMode, QContext};
use crate::corpus::{corpus, TestFunction};
use crate::eq2::{
    build_coproduct_ops, build_generators, casimir_displayed, casimir_l, casimir_l_magnitude,
    check_coproduct_relations, check_relations, normwise_residual, radius_operator, rep_l_word,
    rep_l_word_magnitude, scalar_product_a, Generator, GradedElement, PhaseParams, TruncatedBasis,
};
use crate::error::{QError, Result};
use crate::plane::{
    apply_function_analytic, apply_function_numeric, apply_green_plane, build_sector_matrix,
    compare_with, expand_in_ets, green_at_eigenvalue, reconstruct, sector_spectrum, DiagonalSector,
    NumericSpectrum, PlaneBasis, PlaneVector, SectorBasis, SectorClosure,
};
use crate::qcalc::{
    box_op, box_stencil, d_minus, d_plus, estimate_zero_limit, jackson_integral, lattice_point,
    pairing_h, q_factorial, q_number, weak_box_pairing, weak_helmholtz_pairing, DecayClass,
    QLattice, RadialFunction,
};
use crate::qspecial::{
    bessel_j, bessel_j_order, estimate_c_q, fourier_bessel_matrix, green_g_at, helmholtz_residuals,
    neumann_n, Argument, CqPoint, GreenParams, Solution, SpectralEvalParams, SpectralLattice,
};

/// The Euler–Mascheroni constant, the classical value of `C_q`.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Calculus,
    Bessel,
    Delta,
    Green,
    Plane,
    All,
}

impl Suite {
    /// The individual suites making up [`Suite::All`], in run order.
    pub const MEMBERS: [Suite; 6] = [
        Suite::Algebra,
        Suite::Calculus,
        Suite::Bessel,
        Suite::Delta,
        Suite::Green,
        Suite::Plane,
    ];
}

impl FromStr for Suite {
    type Err = QError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "algebra" => Suite::Algebra,
            "calculus" => Suite::Calculus,
            "bessel" => Suite::Bessel,
            "delta" => Suite::Delta,
            "green" => Suite::Green,
            "plane" => Suite::Plane,
            "all" => Suite::All,
            other => return Err(QError::InvalidParameter(format!("unknown suite `{other}`"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Algebra => "algebra",
            Suite::Calculus => "calculus",
            Suite::Bessel => "bessel",
            Suite::Delta => "delta",
            Suite::Green => "green",
            Suite::Plane => "plane",
            Suite::All => "all",
        })
    }
}

/// Parameters shared by all suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub q: f64,
    /// Window half-width `L`.
    pub half_width: i64,
    pub series_tol: f64,
    /// Tolerance for checks without a sharper one of their own.
    pub assert_tol: f64,
    pub epsilon: f64,
    pub precision: PrecisionMode,
    pub c_q: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            q: 0.5,
            half_width: 40,
            series_tol: 1e-14,
            assert_tol: 1e-8,
            epsilon: 1e-3,
            precision: PrecisionMode::Double,
            c_q: EULER_GAMMA,
        }
    }
}

impl VerifyConfig {
    pub fn context(&self) -> Result<QContext> {
        QContext::new(self.q)?
            .with_precision(self.precision)
            .with_series_tol(self.series_tol)
    }

    fn validate(&self) -> Result<()> {
        if self.half_width < 12 {
            return Err(QError::InvalidParameter(format!(
                "window half-width {} is below 12",
                self.half_width
            )));
        }
        if !(self.assert_tol > 0.0 && self.series_tol > 0.0 && self.epsilon >= 0.0) {
            return Err(QError::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub status: CheckStatus,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Seconds spent in the group of checks this one belongs to.
    pub wall_time: f64,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

/// Run one suite (or all of them). Numeric failures inside a check are
/// recorded as that check's `error` status; only an invalid configuration
/// is returned as an error.
pub fn run_suite(cfg: &VerifyConfig, suite: Suite) -> Result<VerificationReport> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let suites: Vec<Suite> = if suite == Suite::All {
        Suite::MEMBERS.to_vec()
    } else {
        vec![suite]
    };
    let mut rec = Recorder {
        checks: Vec::new(),
        suite,
    };
    for s in suites {
        rec.suite = s;
        match s {
            Suite::Algebra => algebra(cfg, &ctx, &mut rec),
            Suite::Calculus => calculus(cfg, &ctx, &mut rec),
            Suite::Bessel => bessel(cfg, &ctx, &mut rec),
            Suite::Delta => delta(cfg, &ctx, &mut rec),
            Suite::Green => green(cfg, &ctx, &mut rec),
            Suite::Plane => plane(cfg, &ctx, &mut rec),
            Suite::All => unreachable!("expanded above"),
        }
    }
    let pass = rec.checks.iter().all(|c| c.status == CheckStatus::Pass);
    Ok(VerificationReport {
        suite,
        config: *cfg,
        checks: rec.checks,
        pass,
    })
}

/// One measured quantity: name, residual, tolerance.
struct Measure(String, f64, f64);

fn measure(name: impl Into<String>, residual: f64, tolerance: f64) -> Measure {
    Measure(name.into(), residual, tolerance)
}

struct Recorder {
    checks: Vec<CheckResult>,
    suite: Suite,
}

impl Recorder {
    fn group(&mut self, name: &str, f: impl FnOnce() -> Result<Vec<Measure>>) {
        let start = Instant::now();
        let out = f();
        let wall_time = start.elapsed().as_secs_f64();
        match out {
            Ok(ms) => {
                for Measure(n, r, t) in ms {
                    let status = if r <= t {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    };
                    self.checks.push(CheckResult {
                        suite: self.suite,
                        name: n,
                        status,
                        max_residual: r,
                        tolerance: t,
                        wall_time,
                        detail: None,
                    });
                }
            }
            Err(e) => self.checks.push(CheckResult {
                suite: self.suite,
                name: name.to_string(),
                status: CheckStatus::Error,
                max_residual: f64::NAN,
                tolerance: f64::NAN,
                wall_time,
                detail: Some(e.to_string()),
            }),
        }
    }
}

/// Window `[j_lo, j_hi]` holding `ρ ∈ [q^(2 j_hi), rho_max]`, with
/// `q^(2 j_hi) ≤ rho_min`.
pub fn radial_window(ctx: &QContext, rho_max: f64, rho_min: f64) -> Result<QLattice> {
    let l = 2.0 * ctx.ln_q();
    let j_lo = (rho_max.ln() / l).floor() as i64;
    let j_hi = (rho_min.ln() / l).ceil() as i64;
    QLattice::new(ctx, j_lo, j_hi)
}

/// The corpus window: decay of `e^(−ρ)` below double range at the large-ρ
/// end, Jackson weights below `1e-17` at the small-ρ end.
fn corpus_window(ctx: &QContext) -> Result<QLattice> {
    radial_window(ctx, 800.0, 1e-17)
}

/// `{q⁴, 1, q⁻², 0.37}`.
pub fn p_set(ctx: &QContext) -> [f64; 4] {
    [ctx.qpow(4), 1.0, ctx.qpow(-2), 0.37]
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

fn test_element(g: &RadialFunction) -> Result<GradedElement> {
    let mut e = GradedElement::radial(g.clone());
    for (m, j) in [(1, 0), (-2, 1), (2, -1), (0, 3)] {
        e.insert_add(m, j, g.clone())?;
    }
    Ok(e)
}

/// Last lattice index at which the `□` stencil coefficient
/// `q²/((1−q²)²ρ)` stays below `1e3`.
pub fn radial_part_window(ctx: &QContext) -> (i64, i64) {
    let c = ctx.q2() / (1.0 - ctx.q2()).powi(2);
    let hi = ((1e3 / c).ln() / (-2.0 * ctx.ln_q())).floor() as i64;
    (hi - 16, hi)
}

/// Largest entrywise difference between the matrices of `ℒ(C)` on radial
/// functions and of `□ = D₋ρD₊`, and the largest entry, over the window.
pub fn radial_part_deviation(ctx: &QContext, j_lo: i64, j_hi: i64) -> Result<(f64, f64)> {
    let lat = QLattice::new(ctx, j_lo, j_hi)?;
    let mut worst: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for k in lat.indices() {
        let d = RadialFunction::indicator(&lat, k)?;
        let c = casimir_l(ctx, &GradedElement::radial(d.clone()))?;
        let col = c
            .get(0, 0)
            .ok_or_else(|| QError::Window("ℒ(C) left the radial sector".into()))?;
        let b = box_op(ctx, &d)?;
        for (j, _) in b.lattice().iter() {
            let x = col
                .at(j)
                .ok_or_else(|| QError::Window("ℒ(C) and □ windows differ".into()))?;
            let y = b.at(j).unwrap_or_default();
            worst = worst.max((x - y).norm());
            largest = largest.max(y.norm());
        }
    }
    Ok((worst, largest))
}

fn algebra(cfg: &VerifyConfig, ctx: &QContext, rec: &mut Recorder) {
    rec.group("generator relations", || {
        let basis = TruncatedBasis::new(cfg.half_width, 2)?;
        let g = build_generators(basis, PhaseParams::default(), ctx);
        Ok(check_relations(&g, ctx)
            .checks
            .into_iter()
            .map(|c| measure(c.name, c.deviation, c.tolerance))
            .collect())
    });
    rec.group("coproduct relations", || {
        let basis = TruncatedBasis::new(cfg.half_width.min(20), 2)?;
        let c = build_coproduct_ops(basis, PhaseParams::default(), ctx);
        Ok(check_coproduct_relations(&c, ctx)
            .checks
            .into_iter()
            .map(|c| measure(c.name, c.deviation, c.tolerance))
            .collect())
    });
    rec.group("ℒ relations", || {
        use Generator::*;
        let lat = corpus_window(ctx)?;
        let q2 = Complex64::new(ctx.q2(), 0.0);
        let (mut pp, mut kp, mut cas) = (0.0f64, 0.0f64, 0.0f64);
        for f in corpus() {
            let e = test_element(&f.sample(ctx, &lat)?)?;
            let a = rep_l_word(ctx, &[PStar, P], &e)?;
            let b = rep_l_word(ctx, &[P, PStar], &e)?.scale(q2);
            pp = pp.max(normwise_residual(
                &a,
                &b,
                &rep_l_word_magnitude(ctx, &[PStar, P], &e)?,
            ));
            let a = rep_l_word(ctx, &[Kappa, P], &e)?;
            let b = rep_l_word(ctx, &[P, Kappa], &e)?.scale(q2);
            kp = kp.max(normwise_residual(
                &a,
                &b,
                &rep_l_word_magnitude(ctx, &[Kappa, P], &e)?,
            ));
            let a = casimir_l(ctx, &e)?;
            let b = casimir_displayed(ctx, &e)?;
            cas = cas.max(normwise_residual(&a, &b, &casimir_l_magnitude(ctx, &e)?));
        }
        Ok(vec![
            measure("ℒ(p*)ℒ(p) − q²ℒ(p)ℒ(p*) on corpus", pp, 1e-10),
            measure("ℒ(κ)ℒ(p) − q²ℒ(p)ℒ(κ) on corpus", kp, 1e-10),
            measure("ℒ(C) − qʲD₋D₊f(qz, q⁻¹z*) on corpus", cas, 1e-12),
        ])
    });
    rec.group("radial part of ℒ(C)", || {
        let (lo, hi) = radial_part_window(ctx);
        let (dev, _) = radial_part_deviation(ctx, lo, hi)?;
        Ok(vec![measure(
            "ℒ(C) − □ matrix on radial functions",
            dev,
            1e-12,
        )])
    });
    rec.group("scalar product", || {
        let basis = TruncatedBasis::new(cfg.half_width, 2)?;
        let lat = QLattice::symmetric(ctx, cfg.half_width)?;
        let mut worst: f64 = 0.0;
        for f in corpus() {
            let g = f.sample(ctx, &lat)?;
            let op =
                GradedElement::radial(g.clone()).realize(ctx, basis, PhaseParams::default())?;
            let a = scalar_product_a(ctx, basis, &op, &op)?.value;
            let b = pairing_h(ctx, &g, &g)?.value;
            worst = worst.max(rel(a, b));
        }
        Ok(vec![measure(
            "(F, F)_A − (f, f)_H for radial F",
            worst,
            1e-12,
        )])
    });
}

fn calculus(_cfg: &VerifyConfig, ctx: &QContext, rec: &mut Recorder) {
    rec.group("q-numbers", || {
        let q = ctx.q();
        let mut worst: f64 = 0.0;
        for m in 1..=30i64 {
            let direct: f64 = (0..m).map(|i| q.powi((m - 1 - 2 * i) as i32)).sum();
            worst = worst.max((q_number(ctx, m) / direct - 1.0).abs());
            let ratio = q_factorial(ctx, m)? / q_factorial(ctx, m - 1)?;
            worst = worst.max((ratio / q_number(ctx, m) - 1.0).abs());
        }
        Ok(vec![measure(
            "[m] and [m]! against direct sums",
            worst,
            1e-13,
        )])
    });
    rec.group("difference operators", || {
        let lat = QLattice::new(ctx, -8, 8)?;
        let q2 = ctx.q2();
        let mut worst: f64 = 0.0;
        for n in 0..=4i32 {
            let f = RadialFunction::from_real_fn(&lat, DecayClass::Unrestricted, |r| r.powi(n))?;
            let cp = (1.0 - q2.powi(n)) / (1.0 - q2);
            let cm = (1.0 - q2.powi(-n)) / (1.0 - 1.0 / q2);
            for (op, c) in [(d_plus(ctx, &f)?, cp), (d_minus(ctx, &f)?, cm)] {
                for (j, r) in op.lattice().iter() {
                    let want = c * r.powi(n - 1);
                    let got = op.at(j).unwrap_or_default().re;
                    let scale = want.abs().max(r.powi(n - 1).abs() * 1e-300);
                    worst = worst.max(if want == 0.0 {
                        got.abs()
                    } else {
                        (got - want).abs() / scale
                    });
                }
            }
        }
        Ok(vec![measure(
            "D₊ρⁿ and D₋ρⁿ against closed forms",
            worst,
            1e-12,
        )])
    });
    rec.group("□ forms", || {
        let lat = corpus_window(ctx)?;
        let (mut comp, mut sym) = (0.0f64, 0.0f64);
        let samples = corpus()
            .iter()
            .map(|f| f.sample(ctx, &lat))
            .collect::<Result<Vec<_>>>()?;
        for f in &samples {
            let a = box_op(ctx, f)?;
            let b = box_stencil(ctx, f)?;
            let denom = (1.0 - ctx.q2()) * (1.0 / ctx.q2() - 1.0);
            for (j, rho) in a.lattice().iter() {
                let m = |k: i64| f.at(k).unwrap_or_default().norm();
                let scale =
                    ((m(j - 1) + 2.0 * m(j) + m(j + 1)) / (denom * rho)).max(f64::MIN_POSITIVE);
                comp = comp.max(
                    (a.at(j).unwrap_or_default() - b.at(j).unwrap_or_default()).norm() / scale,
                );
            }
        }
        for f in &samples {
            for g in &samples {
                let bf = box_op(ctx, f)?;
                let (lo, hi) = (bf.lattice().j_min(), bf.lattice().j_max());
                let bg = box_op(ctx, g)?;
                let x = pairing_h(ctx, &bf, &g.restrict(lo, hi)?)?.value;
                let y = pairing_h(ctx, &f.restrict(lo, hi)?, &bg)?.value;
                let scale = pairing_h(
                    ctx,
                    &bf.map(|v| v.norm().into()),
                    &g.restrict(lo, hi)?.map(|v| v.norm().into()),
                )?
                .value
                .re
                .max(f64::MIN_POSITIVE);
                sym = sym.max((x - y).norm() / scale);
            }
        }
        Ok(vec![
            measure("D₋ρD₊ − three-point stencil on corpus", comp, 1e-12),
            measure("(□f, g)_H − (f, □g)_H on corpus pairs", sym, 1e-12),
        ])
    });
    rec.group("Jackson integral", || {
        let lat = radial_window(ctx, 1e3, 1e-17)?;
        let mut worst: f64 = 0.0;
        for k in 0..=3i32 {
            let f = RadialFunction::from_fn(&lat, DecayClass::CompactSupport, |j, r| {
                Complex64::new(if j >= 0 { r.powi(k) } else { 0.0 }, 0.0)
            })?;
            let got = jackson_integral(ctx, &f)?.value.re;
            let want = (1.0 - ctx.q2()) / (1.0 - ctx.q2().powi(k + 1));
            worst = worst.max((got / want - 1.0).abs());
        }
        Ok(vec![measure(
            "∫₀¹ ρᵏ d_qρ against (1−q²)/(1−q^(2k+2))",
            worst,
            1e-13,
        )])
    });
    rec.group("zero limit", || {
        let lat = corpus_window(ctx)?;
        let mut worst: f64 = 0.0;
        for f in corpus() {
            let s = f.sample(ctx, &lat)?;
            let plain = RadialFunction::new(lat.clone(), s.samples().to_vec(), s.decay())?;
            let est = estimate_zero_limit(ctx, &plain)?;
            worst = worst.max((est - Complex64::new(f.zero_value(), 0.0)).norm());
        }
        Ok(vec![measure(
            "f(0) extrapolated from the small-ρ samples",
            worst,
            1e-12,
        )])
    });
}

/// `(log ρ, □f)_A` for a corpus member, with the truncation estimate.
pub fn delta_measurement(ctx: &QContext, f: &TestFunction) -> Result<(Complex64, f64)> {
    let lat = corpus_window(ctx)?;
    let s = f.sample(ctx, &lat)?;
    let g = RadialFunction::log_rho(ctx, &lat)?;
    let w = weak_box_pairing(ctx, &g, &s)?;
    Ok((w.value, w.truncation_estimate))
}

fn delta(_cfg: &VerifyConfig, ctx: &QContext, rec: &mut Recorder) {
    rec.group("delta identity", || {
        let factor = ctx.delta_factor();
        let mut out = Vec::new();
        for f in corpus() {
            let (v, trunc) = delta_measurement(ctx, &f)?;
            let want = factor * f.zero_value();
            out.push(measure(
                format!("(log ρ, □f)_A − factor·f(0) for {}", f.name()),
                (v.re - want).abs().max(v.im.abs()),
                trunc.max(1e-8),
            ));
        }
        let (v, _) = delta_measurement(ctx, &TestFunction::PowerExp { k: 0 })?;
        out.push(measure(
            format!(
                "measured (□ log ρ, f)/f(0) = {:.10} against (2q ln q)/(q − q⁻¹) = {:.10}",
                v.re, factor
            ),
            (v.re - factor).abs(),
            1e-8,
        ));
        if ctx.q() == 0.5 {
            out.push(measure(
                format!(
                    "measured (□ log ρ, f)/f(0) = {:.10} against 0.46209812",
                    v.re
                ),
                (v.re - 0.462_098_12).abs(),
                1e-8,
            ));
        }
        Ok(out)
    });
}

/// Hahn–Exton `J₀(y; Q) = Σ_k (−1)^k Q^(k(k+1)/2) y^(2k)/((Q;Q)_k)²`.
pub fn hahn_exton_j0(y: f64, big_q: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut poch = 1.0;
    for k in 1..400 {
        poch *= 1.0 - big_q.powi(k);
        term = (-1.0f64).powi(k) * big_q.powf(k as f64 * (k as f64 + 1.0) / 2.0) * y.powi(2 * k)
            / (poch * poch);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    let _ = term;
    sum
}

fn bessel(cfg: &VerifyConfig, ctx: &QContext, rec: &mut Recorder) {
    rec.group("homogeneous solutions", || {
        let (lo, hi) = (-cfg.half_width + 1, cfg.half_width - 1);
        let mut out = Vec::new();
        for p in p_set(ctx) {
            let rj = helmholtz_residuals(ctx, Solution::Bessel, p, lo, hi)?;
            let rn = helmholtz_residuals(ctx, Solution::Neumann { c_q: cfg.c_q }, p, lo, hi)?;
            let mj = rj.iter().map(|r| r.relative).fold(0.0, f64::max);
            let mn = rn.iter().map(|r| r.relative).fold(0.0, f64::max);
            out.push(measure(
                format!("(□+p)𝒥 relative residual, p = {p:.6}"),
                mj,
                1e-10,
            ));
            out.push(measure(
                format!("(□+p)𝒩 relative residual, p = {p:.6}"),
                mn,
                1e-8,
            ));
        }
        Ok(out)
    });
    rec.group("series identities", || {
        let q = ctx.q();
        let mut he: f64 = 0.0;
        for x in [0.1, 0.5, 1.0, 2.0] {
            let a = bessel_j(ctx, x)?.value.re;
            let b = hahn_exton_j0((1.0 - q * q) * x / q, q * q);
            he = he.max((a - b).abs() / a.abs().max(1e-3));
        }
        let mut refl: f64 = 0.0;
        let mut lead: f64 = 0.0;
        for s in 1..=3i64 {
            for x in [0.3, 1.7] {
                let a = bessel_j_order(ctx, -s, x)?.value.re;
                let b = ctx.qpow(s) * bessel_j_order(ctx, s, ctx.qpow(s) * x)?.value.re;
                refl = refl.max((a - b).abs() / a.abs());
            }
            for sign in [1, -1] {
                let so = sign * s;
                let x = 1e-4;
                let v = bessel_j_order(ctx, so, x)?.value.re / x.powi(s as i32);
                let want = ctx.qpow(-(so * (s + 1)) / 2) / q_factorial(ctx, s)?;
                lead = lead.max((v / want - 1.0).abs());
            }
        }
        Ok(vec![
            measure("𝒥(x) − J₀((1−q²)x/q; q²) (Hahn–Exton series)", he, 1e-12),
            measure("𝒥_(−s)(x) − q^s·𝒥_s(q^s x)", refl, 1e-12),
            measure(
                "𝒥_s(x)/x^|s| − q^(−s(|s|+1)/2)/[|s|]! at x = 1e-4",
                lead,
                1e-6,
            ),
        ])
    });
    rec.group("Fourier–Bessel orthogonality", || {
        let lat = QLattice::symmetric(ctx, cfg.half_width)?;
        let m = fourier_bessel_matrix(ctx, -5..=5, &lat, true)?;
        let (mut off, mut diag) = (0.0f64, 0.0f64);
        for (a, row) in m.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                let mm = m[b][b].value.re;
                if a == b {
                    let k = b as i64 - 5;
                    let want = (1.0 - ctx.q2()) * ctx.qpow(-2 * k);
                    diag = diag.max((mm / want - 1.0).abs());
                } else {
                    off = off.max(e.value.norm() / mm.abs());
                }
            }
        }
        Ok(vec![
            measure("Fourier–Bessel off-diagonal |M(n,m)|/M(m,m)", off, 1e-8),
            measure(
                "Fourier–Bessel diagonal M(m,m) against (1−q²)q^(−2m)",
                diag,
                1e-8,
            ),
        ])
    });
}

/// `(𝒢ᵖ, (□+p)f)_A` for one corpus member, with the truncation estimate.
pub fn weak_green_measurement(
    ctx: &QContext,
    c_q: f64,
    p: f64,
    f: &TestFunction,
) -> Result<(Complex64, f64)> {
    let lat = corpus_window(ctx)?;
    let s = f.sample(ctx, &lat)?;
    let g = RadialFunction::from_fn(&lat, DecayClass::Unrestricted, |j, _| {
        green_g_at(ctx, c_q, &Argument::Lattice { p, j })
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })?;
    if g.samples().iter().any(|v| !v.is_finite()) {
        return Err(QError::Range(format!(
            "𝒢 not representable on the corpus window for p = {p}"
        )));
    }
    let w = weak_helmholtz_pairing(ctx, &g, &s, p)?;
    Ok((w.value, w.truncation_estimate))
}

fn green(cfg: &VerifyConfig, ctx: &QContext, rec: &mut Recorder) {
    rec.group("weak Green identity", || {
        let mut out = Vec::new();
        for p in p_set(ctx) {
            let mut worst: f64 = 0.0;
            let mut bound: f64 = 0.0;
            for f in corpus() {
                let (v, trunc) = weak_green_measurement(ctx, cfg.c_q, p, &f)?;
                worst = worst.max((v - Complex64::new(f.zero_value(), 0.0)).norm());
                bound = bound.max(trunc);
            }
            out.push(measure(
                format!("(𝒢ᵖ, (□+p)f)_A − f(0) on corpus, p = {p:.6}"),
                worst,
                bound.max(1e-6),
            ));
        }
        Ok(out)
    });
    rec.group("Green function structure", || {
        let mut lin: f64 = 0.0;
        let mut im: f64 = 0.0;
        let delta = 0.25;
        for p in p_set(ctx) {
            let a = GreenParams::new(ctx, p, cfg.c_q)?;
            let b = GreenParams::new(ctx, p, cfg.c_q + delta)?;
            for rho in [0.01, 0.3, 1.0, 4.0] {
                let na = neumann_n(ctx, &a, rho)?;
                let nb = neumann_n(ctx, &b, rho)?;
                let j = crate::qspecial::bessel_j_at(ctx, 0, &Argument::Product { p, rho })?
                    .value
                    .re;
                let want = (ctx.q() - 1.0 / ctx.q()) / (ctx.q() * ctx.ln_q()) * delta * j;
                let diff = nb.value.re - na.value.re;
                lin = lin.max((diff - want).abs() / (na.value.norm() + nb.value.norm()).max(1.0));
                let g = crate::qspecial::green_g(ctx, &a, rho)?;
                im = im.max((g.im + j).abs() + (g.re - na.value.re).abs());
            }
        }
        Ok(vec![
            measure("𝒩(c+δ) − 𝒩(c) − (q−q⁻¹)/(q ln q)·δ·𝒥", lin, 1e-13),
            measure("𝒢 − (𝒩 − i𝒥)", im, 0.0),
        ])
    });
    rec.group("spectral Green function", || {
        // The λ-sum converges only on lattice points ρ = q^(2i); off the
        // lattice 𝒥(√(λρ)) grows with λ.
        let sp = spectral_window(ctx, 0.0)?;
        let rho_grid: Vec<f64> = (-1..=4).map(|i| lattice_point(ctx, 2 * i)).collect();
        let mut worst: f64 = 0.0;
        let mut imag: f64 = 0.0;
        for p in [0.37, 0.7, 2.3] {
            let est = estimate_c_q(ctx, &[p], &rho_grid, &sp, f64::INFINITY)?;
            let (_, r) = real_part_fit(&est.points);
            worst = worst.max(r);
            for pt in &est.points {
                imag = imag.max(pt.spectral.im.abs() / pt.spectral.norm());
            }
        }
        Ok(vec![
            measure(
                "Re spectral sum − 𝒩(·; c(p)), one constant per p, lattice ρ",
                worst,
                cfg.assert_tol,
            ),
            measure(
                "imaginary part of the spectral sum off resonance",
                imag,
                0.0,
            ),
        ])
    });
}

/// Scaled λ-lattice window `j ∈ [−max(12, ⌈8.4/|ln q|⌉), ⌈40/|ln q|⌉]`
/// (−13..58 at q = 0.5): wide enough on the large-λ side to pass the oscillatory
/// region of 𝒥, and on the small-λ side for `λ/p` to fall below `1e-17`.
pub fn spectral_window(ctx: &QContext, epsilon: f64) -> Result<SpectralEvalParams> {
    let l = ctx.ln_q().abs();
    SpectralEvalParams::new(
        epsilon,
        -((8.4 / l).ceil() as i64).max(12),
        (40.0 / l).ceil() as i64,
        SpectralLattice::Scaled,
    )
}

/// Least-squares constant `c` with `Re spectral ≈ 𝒩(·; c)` over the
/// points, and the relative residual of that fit.
pub fn real_part_fit(points: &[CqPoint]) -> (f64, f64) {
    let num: f64 = points
        .iter()
        .map(|pt| pt.slope * (pt.spectral.re - pt.model_at_zero.re))
        .sum();
    let den: f64 = points.iter().map(|pt| pt.slope * pt.slope).sum();
    let c = if den > 0.0 { num / den } else { 0.0 };
    let r2: f64 = points
        .iter()
        .map(|pt| (pt.spectral.re - pt.model_at_zero.re - c * pt.slope).powi(2))
        .sum();
    let s2: f64 = points.iter().map(|pt| pt.spectral.re.powi(2)).sum();
    (
        c,
        if s2 > 0.0 {
            (r2 / s2).sqrt()
        } else {
            f64::INFINITY
        },
    )
}

/// Window half-width used by the plane suite: at least `42/|ln q|`
/// (61 at q = 0.5), enough for the s = 0 eigenvectors to resolve on both
/// sides of the probe vectors.
pub fn plane_half_width(cfg: &VerifyConfig) -> i64 {
    cfg.half_width.max((42.0 / cfg.q.ln().abs()).ceil() as i64)
}

/// Row of the probe vectors `e_(s+j)⊗e_j` (for s ≤ 0; shifted by −s for
/// s > 0). Lower rows pick up eigenvectors with very negative t, where
/// `𝒢ᵖ(q^(2t))` is large enough to amplify the rounding in the numeric
/// eigenvectors past the tolerance, and eventually leaves double range.
pub const PLANE_PROBE_ROW: i64 = 8;

fn plane(cfg: &VerifyConfig, ctx: &QContext, rec: &mut Recorder) {
    let basis = match TruncatedBasis::new(plane_half_width(cfg), 8) {
        Ok(b) => b,
        Err(e) => {
            rec.group("plane window", || Err(e));
            return;
        }
    };
    let sectors: Vec<i64> = (-3..=3).collect();
    rec.group("sector matrices", || {
        let small = TruncatedBasis::new(cfg.half_width.min(20), 3)?;
        let r = radius_operator(small, PhaseParams::default(), ctx);
        let (mut dev, mut cross) = (0.0f64, 0.0f64);
        for &s in &sectors {
            let sector = DiagonalSector::in_window(small, s)?;
            let m =
                build_sector_matrix(ctx, sector, PhaseParams::default(), SectorClosure::Truncate)?;
            let c = compare_with(small, &r, &m)?;
            dev = dev.max(c.max_deviation / c.max_entry);
            cross = cross.max(c.cross_sector);
        }
        let adj = r.sub(&r.adjoint())?.inf_norm();
        Ok(vec![
            measure(
                "sector matrix − tensor R = Δ(ρ) on the interior",
                dev,
                4.0 * f64::EPSILON,
            ),
            measure("R entries between different sectors", cross, 0.0),
            measure("R − R*", adj, 0.0),
        ])
    });
    rec.group("e_ts eigenbasis", || {
        let (mut res, mut back, mut gram, mut ev, mut ov) =
            (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let mut spectra = Vec::new();
        for &s in &sectors {
            let rows = sector_spectrum(ctx, basis, s)?;
            for r in &rows {
                res = res.max(r.residual.relative);
                back = back.max(r.residual.backward);
                ev = ev.max(r.relative_error);
                ov = ov.max(1.0 - r.overlap);
            }
            gram = gram
                .max(SectorBasis::new(ctx, DiagonalSector::in_window(basis, s)?)?.gram_deviation());
            spectra.push(rows);
        }
        let mut universal: f64 = 0.0;
        let base = &spectra[3];
        for rows in &spectra {
            for r in rows {
                if let Some(b) = base.iter().find(|b| b.t == r.t) {
                    universal = universal.max((r.eigenvalue / b.eigenvalue - 1.0).abs());
                }
            }
        }
        Ok(vec![
            measure(
                "‖R e_ts − q^(2t) e_ts‖/q^(2t), s = −3..3",
                res,
                cfg.assert_tol,
            ),
            measure(
                "R e_ts − q^(2t) e_ts relative to the row magnitudes",
                back,
                64.0 * f64::EPSILON,
            ),
            measure("Gram matrix of e_ts − identity", gram, cfg.assert_tol),
            measure("numeric eigenvalues against q^(2t)", ev, cfg.assert_tol),
            measure("1 − |(numeric eigenvector, e_ts)|", ov, cfg.assert_tol),
            measure(
                "eigenvalues of sector s against sector 0",
                universal,
                cfg.assert_tol,
            ),
        ])
    });
    rec.group("expansion and functional calculus", || {
        let params = GreenParams::new(ctx, 0.37, cfg.c_q)?;
        let tol = cfg.assert_tol;
        let (mut pars, mut round, mut inverse, mut ident) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let (mut green_diff, mut rho_diff, mut single, mut linear) =
            (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let windows = PlaneBasis::new(ctx, basis, &sectors)?;
        let numeric = NumericSpectrum::new(ctx, &windows)?;
        let one = |_t: i64| Ok(Complex64::new(1.0, 0.0));
        let lam = |t: i64| Ok(Complex64::new(ctx.qpow(2 * t), 0.0));
        let g = |t: i64| green_at_eigenvalue(ctx, &params, t);
        for &s in &sectors {
            let j = PLANE_PROBE_ROW - s.max(0);
            let v = PlaneVector::basis_vector(basis, s + j, j)?;
            let ex = expand_in_ets(&v, &windows, tol)?;
            pars = pars.max((ex.parseval_sum() - v.norm_sqr()).abs());
            round = round.max(reconstruct(&ex, &windows)?.sub(&v)?.norm());
            let sb = &windows.sectors[&s];
            for e in &sb.vectors {
                let want = e.coefficient(j).unwrap_or_default();
                inverse = inverse.max((ex.get(e.t, s) - Complex64::new(want, 0.0)).norm());
            }
            ident = ident.max(apply_function_numeric(&v, &numeric, one)?.sub(&v)?.norm());
            let ga = apply_green_plane(ctx, &params, &v, &windows, tol)?;
            let gn = apply_function_numeric(&v, &numeric, g)?;
            green_diff = green_diff.max(ga.sub(&gn)?.norm() / ga.norm());
            let ra = apply_function_analytic(&v, &windows, tol, lam)?;
            let rn = apply_function_numeric(&v, &numeric, lam)?;
            rho_diff = rho_diff.max(ra.sub(&rn)?.norm() / ra.norm());

            let t = sb.vectors[sb.vectors.len() / 2].t;
            let e = sb
                .get(t)
                .ok_or_else(|| QError::Resolution("probe t not resolved".into()))?;
            let mut ev = PlaneVector::zeros(basis);
            let c: Vec<Complex64> = e
                .coefficients
                .iter()
                .map(|x| Complex64::new(*x, 0.0))
                .collect();
            ev.add_sector(&e.sector, &c)?;
            if ev.is_interior() {
                let out = apply_green_plane(ctx, &params, &ev, &windows, tol)?;
                let want = ev.scale(g(t)?);
                single = single.max(out.sub(&want)?.norm() / want.norm());
            }

            let u = PlaneVector::basis_vector(basis, s + j + 1, j + 1)?;
            let (a, b) = (Complex64::new(0.7, -0.2), Complex64::new(-1.3, 0.4));
            let lhs =
                apply_green_plane(ctx, &params, &u.scale(a).add(&v.scale(b))?, &windows, tol)?;
            let rhs = apply_green_plane(ctx, &params, &u, &windows, tol)?
                .scale(a)
                .add(&apply_green_plane(ctx, &params, &v, &windows, tol)?.scale(b))?;
            linear = linear.max(lhs.sub(&rhs)?.norm() / rhs.norm());
        }
        Ok(vec![
            measure(
                "Parseval Σ|(e_ts, v)|² − ‖v‖² for v = e_(s+j)⊗e_j",
                pars,
                tol,
            ),
            measure("round trip v → (e_ts, v) → Σ(e_ts, v)e_ts", round, tol),
            measure(
                "(e_ts, e_(s+j)⊗e_j) − (−1)ʲq^(t−j)𝒥_s(a q^(t−j))",
                inverse,
                tol,
            ),
            measure("identity through the numeric eigenpairs", ident, tol),
            measure(
                "𝒢ᵖ(R)v: analytic e_ts against numeric eigenpairs",
                green_diff,
                tol,
            ),
            measure(
                "R v: analytic e_ts against numeric eigenpairs",
                rho_diff,
                tol,
            ),
            measure("𝒢ᵖ(R)e_ts − 𝒢ᵖ(q^(2t))e_ts", single, tol),
            measure("linearity of 𝒢ᵖ(R)", linear, 1e-14),
        ])
    });
}
