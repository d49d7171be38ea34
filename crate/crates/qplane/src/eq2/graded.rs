//! Graded elements `Σ z^m g(ρ) υ^j` of the function algebra and the
//! representation `ℒ` of `U_q(e(2))` acting on them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::generators::PhaseParams;
use super::operator::{LatticeOperator, TruncatedBasis};
use crate::context::QContext;
use crate::error::{QError, Result};
use crate::qcalc::{QLattice, RadialFunction};

/// Finite sum of components `z^m g(ρ) υ^j` (with `z^m` read as `z*^(−m)`
/// for negative `m`), keyed by `(m, j)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GradedElement {
    components: BTreeMap<(i64, i64), RadialFunction>,
}

/// Generators of `U_q(e(2))` represented by [`rep_l`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    P,
    PStar,
    Kappa,
    KappaInv,
}

/// σ₁ grade `m − j` and σ₂ grade `m` of the component `(m, j)`, from
/// `σ₁(z) = e^(it)z`, `σ₁(z*) = e^(−it)z*`, `σ₁(υ) = e^(−it)υ` and
/// `σ₂` acting on `z` alone.
pub fn sigma_grades(m: i64, j: i64) -> (i64, i64) {
    (m - j, m)
}

impl GradedElement {
    pub fn new() -> Self {
        Self::default()
    }

    /// The element `g(ρ)·υ⁰`.
    pub fn radial(g: RadialFunction) -> Self {
        let mut e = Self::new();
        e.components.insert((0, 0), g);
        e
    }

    pub fn component(m: i64, j: i64, g: RadialFunction) -> Self {
        let mut e = Self::new();
        e.components.insert((m, j), g);
        e
    }

    pub fn components(&self) -> impl Iterator<Item = (&(i64, i64), &RadialFunction)> {
        self.components.iter()
    }

    pub fn get(&self, m: i64, j: i64) -> Option<&RadialFunction> {
        self.components.get(&(m, j))
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Add a component; coefficients on different windows are summed on the
    /// common part of the windows.
    pub fn insert_add(&mut self, m: i64, j: i64, g: RadialFunction) -> Result<()> {
        let merged = match self.components.remove(&(m, j)) {
            None => g,
            Some(old) => {
                let lo = old.lattice().j_min().max(g.lattice().j_min());
                let hi = old.lattice().j_max().min(g.lattice().j_max());
                old.restrict(lo, hi)?.add(&g.restrict(lo, hi)?)?
            }
        };
        self.components.insert((m, j), merged);
        Ok(())
    }

    pub fn add(&self, other: &GradedElement) -> Result<Self> {
        let mut out = self.clone();
        for (&(m, j), g) in &other.components {
            out.insert_add(m, j, g.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        GradedElement {
            components: self
                .components
                .iter()
                .map(|(k, g)| (*k, g.scale(c)))
                .collect(),
        }
    }

    pub fn sub(&self, other: &GradedElement) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Component-wise `e^(i·t₁·g₁ + i·t₂·g₂)`.
    pub fn twist(&self, t1: f64, t2: f64) -> Self {
        GradedElement {
            components: self
                .components
                .iter()
                .map(|(&(m, j), g)| {
                    let (g1, g2) = sigma_grades(m, j);
                    (
                        (m, j),
                        g.scale(Complex64::from_polar(1.0, t1 * g1 as f64 + t2 * g2 as f64)),
                    )
                })
                .collect(),
        }
    }

    /// σ₁-invariant part (the quantum plane).
    pub fn project_b(&self) -> Self {
        self.filtered(|m, j| sigma_grades(m, j).0 == 0)
    }

    /// Part invariant under both gradings: functions of `ρ` alone.
    pub fn project_h(&self) -> Self {
        self.filtered(|m, j| sigma_grades(m, j) == (0, 0))
    }

    fn filtered(&self, keep: impl Fn(i64, i64) -> bool) -> Self {
        GradedElement {
            components: self
                .components
                .iter()
                .filter(|(&(m, j), _)| keep(m, j))
                .map(|(k, g)| (*k, g.clone()))
                .collect(),
        }
    }

    /// Matrix of the element on the window: component `(m, j)` maps `e_k` to
    /// `e^(ijφ) e^(imψ) q^(|m|(k+j)) g(ρ_(k+j)) e_(k+j)`. Positions where `g`
    /// has no sample are left empty.
    pub fn realize(
        &self,
        ctx: &QContext,
        basis: TruncatedBasis,
        phases: PhaseParams,
    ) -> Result<LatticeOperator> {
        let mut entries = Vec::new();
        for (&(m, j), g) in &self.components {
            let phase =
                Complex64::from_polar(1.0, j as f64 * phases.phi() + m as f64 * phases.psi());
            for k in basis.labels() {
                let n = k + j;
                let (Some(row), Some(col), Some(val)) = (basis.index(n), basis.index(k), g.at(n))
                else {
                    continue;
                };
                let zpow = ctx.qpow(n).powi(m.unsigned_abs() as i32);
                entries.push((row, col, phase * val * zpow));
            }
        }
        LatticeOperator::from_entries(basis.dim(), entries)
    }
}

/// Arithmetic used by the radial coefficient maps: ordinary values, or
/// magnitudes with every difference turned into a sum (a rounding scale).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Arith {
    Signed,
    Magnitude,
}

fn lattice_of(g: &RadialFunction, lo: i64, hi: i64) -> Result<QLattice> {
    let (a, b) = (g.lattice().j_min() + lo, g.lattice().j_max() - hi);
    if a >= b {
        return Err(QError::Window(
            "coefficient window exhausted by q-shifts".into(),
        ));
    }
    g.lattice().restrict(a, b)
}

/// `h(ρ) = (g(ρ) − c·g(q^(2·dir)ρ))/(d·ρ^e)` on the surviving window.
fn shift_combo(
    g: &RadialFunction,
    dir: i64,
    c: f64,
    d: f64,
    divide_rho: bool,
    arith: Arith,
) -> Result<RadialFunction> {
    let (lo, hi) = if dir > 0 { (0, 1) } else { (1, 0) };
    let lat = lattice_of(g, lo, hi)?;
    let samples: Vec<Complex64> = lat
        .iter()
        .map(|(i, r)| {
            let a = g.at(i).unwrap_or_default();
            let b = g.at(i + dir).unwrap_or_default();
            let num = match arith {
                Arith::Signed => a - b * c,
                Arith::Magnitude => Complex64::new(a.norm() + b.norm() * c.abs(), 0.0),
            };
            let den = if divide_rho { d * r } else { d };
            match arith {
                Arith::Signed => num / den,
                Arith::Magnitude => num / den.abs(),
            }
        })
        .collect();
    RadialFunction::new(lat, samples, g.decay())
}

/// Radial part of `D₊ᶻ` on grade `m`: lowers the grade by one.
fn a_map(ctx: &QContext, m: i64, g: &RadialFunction, arith: Arith) -> Result<RadialFunction> {
    let q2 = ctx.q2();
    if m >= 1 {
        shift_combo(g, 1, ctx.qpow(2 * m), 1.0 - q2, false, arith)
    } else {
        shift_combo(g, 1, 1.0, 1.0 - q2, true, arith)
    }
}

/// Radial part of `D₋^(z*)` on grade `m`: raises the grade by one.
fn b_map(ctx: &QContext, m: i64, g: &RadialFunction, arith: Arith) -> Result<RadialFunction> {
    let c = 1.0 - 1.0 / ctx.q2();
    if m >= 0 {
        shift_combo(g, -1, 1.0, c, true, arith)
    } else {
        shift_combo(g, -1, ctx.qpow(2 * m), c, false, arith)
    }
}

fn rep_with(
    ctx: &QContext,
    gen: Generator,
    element: &GradedElement,
    arith: Arith,
) -> Result<GradedElement> {
    let i = Complex64::new(0.0, 1.0);
    let fix = |c: Complex64| match arith {
        Arith::Signed => c,
        Arith::Magnitude => Complex64::new(c.norm(), 0.0),
    };
    let mut out = GradedElement::new();
    for (&(m, j), g) in &element.components {
        let (key, coef, h) = match gen {
            Generator::P => (
                (m - 1, j + 1),
                i * ctx.qpow(j + 1),
                a_map(ctx, m, g, arith)?,
            ),
            Generator::PStar => ((m + 1, j - 1), i * ctx.qpow(j), b_map(ctx, m, g, arith)?),
            Generator::Kappa => ((m, j), Complex64::new(ctx.qpow(j - m), 0.0), g.clone()),
            Generator::KappaInv => ((m, j), Complex64::new(ctx.qpow(m - j), 0.0), g.clone()),
        };
        let h = if arith == Arith::Magnitude {
            h.map(|v| Complex64::new(v.norm(), 0.0))
        } else {
            h
        };
        out.insert_add(key.0, key.1, h.scale(fix(coef)))?;
    }
    Ok(out)
}

/// `ℒ(p)fυʲ = i q^(j+1) D₊ᶻf·υ^(j+1)`, `ℒ(p*)fυʲ = i qʲ D₋^(z*)f·υ^(j−1)`,
/// `ℒ(κ^(±1))fυʲ = q^(±j) f(q^(∓1)z, q^(±1)z*)υʲ`, acting on each graded
/// component. Division by `z` is multiplication by `z*ρ⁻¹`.
pub fn rep_l(ctx: &QContext, gen: Generator, element: &GradedElement) -> Result<GradedElement> {
    rep_with(ctx, gen, element, Arith::Signed)
}

/// [`rep_l`] evaluated on magnitudes with differences replaced by sums:
/// a bound on the size of every intermediate, used to scale residuals.
pub fn rep_l_magnitude(
    ctx: &QContext,
    gen: Generator,
    element: &GradedElement,
) -> Result<GradedElement> {
    rep_with(ctx, gen, element, Arith::Magnitude)
}

fn compose(
    ctx: &QContext,
    gens: &[Generator],
    element: &GradedElement,
    arith: Arith,
) -> Result<GradedElement> {
    let mut e = element.clone();
    for &g in gens.iter().rev() {
        e = rep_with(ctx, g, &e, arith)?;
    }
    Ok(e)
}

/// `ℒ(g₁)ℒ(g₂)…` applied right to left.
pub fn rep_l_word(
    ctx: &QContext,
    word: &[Generator],
    element: &GradedElement,
) -> Result<GradedElement> {
    compose(ctx, word, element, Arith::Signed)
}

/// Magnitude bound for [`rep_l_word`].
pub fn rep_l_word_magnitude(
    ctx: &QContext,
    word: &[Generator],
    element: &GradedElement,
) -> Result<GradedElement> {
    compose(ctx, word, element, Arith::Magnitude)
}

/// `ℒ(C)` for the Casimir `C = −κ⁻¹pp*`, composed from [`rep_l`].
///
/// On functions of `ρ` this is `□`. On a general component `(m, j)` it
/// agrees with `qʲ·D₋^(z*)D₊ᶻ f(qz, q⁻¹z*)·υʲ` ([`casimir_displayed`]).
pub fn casimir_l(ctx: &QContext, element: &GradedElement) -> Result<GradedElement> {
    let e = rep_l_word(
        ctx,
        &[Generator::KappaInv, Generator::P, Generator::PStar],
        element,
    )?;
    Ok(e.scale(Complex64::new(-1.0, 0.0)))
}

/// Magnitude bound for [`casimir_l`].
pub fn casimir_l_magnitude(ctx: &QContext, element: &GradedElement) -> Result<GradedElement> {
    rep_l_word_magnitude(
        ctx,
        &[Generator::KappaInv, Generator::P, Generator::PStar],
        element,
    )
}

/// `ℒ(C)fυʲ = qʲ·D₋^(z*)D₊ᶻ f(qz, q⁻¹z*)·υʲ` evaluated directly: the
/// rescaling contributes `q^m`, then `D₊ᶻ` and `D₋^(z*)` act in turn.
pub fn casimir_displayed(ctx: &QContext, element: &GradedElement) -> Result<GradedElement> {
    let mut out = GradedElement::new();
    for (&(m, j), g) in &element.components {
        let lowered = a_map(ctx, m, g, Arith::Signed)?;
        let h = b_map(ctx, m - 1, &lowered, Arith::Signed)?;
        out.insert_add(m, j, h.scale(Complex64::new(ctx.qpow(j + m), 0.0)))?;
    }
    Ok(out)
}

/// Largest pointwise `|a − b|` over common components and common windows,
/// divided by the matching entry of `scale` (falling back to absolute
/// differences where the scale vanishes). Components present on one side
/// only count with their full size.
pub fn normwise_residual(a: &GradedElement, b: &GradedElement, scale: &GradedElement) -> f64 {
    let mut worst: f64 = 0.0;
    let keys: std::collections::BTreeSet<_> = a
        .components
        .keys()
        .chain(b.components.keys())
        .copied()
        .collect();
    for key in keys {
        match (a.components.get(&key), b.components.get(&key)) {
            (Some(fa), Some(fb)) => {
                let lo = fa.lattice().j_min().max(fb.lattice().j_min());
                let hi = fa.lattice().j_max().min(fb.lattice().j_max());
                for i in lo..=hi {
                    let d = (fa.at(i).unwrap_or_default() - fb.at(i).unwrap_or_default()).norm();
                    let s = scale
                        .components
                        .get(&key)
                        .and_then(|f| f.at(i))
                        .map_or(0.0, |v| v.norm());
                    worst = worst.max(if s > 0.0 { d / s } else { d });
                }
            }
            (Some(f), None) | (None, Some(f)) => {
                worst = worst.max(if f.max_abs() > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                })
            }
            (None, None) => {}
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcalc::{box_op, DecayClass};

    fn ctx() -> QContext {
        QContext::new(0.6).unwrap()
    }

    fn radial(ctx: &QContext, f: impl Fn(f64) -> f64) -> RadialFunction {
        let lat = QLattice::symmetric(ctx, 8).unwrap();
        RadialFunction::from_real_fn(&lat, DecayClass::Summable, f).unwrap()
    }

    #[test]
    fn kappa_is_identity_on_radial() {
        let c = ctx();
        let f = GradedElement::radial(radial(&c, |r| (-r).exp()));
        assert_eq!(rep_l(&c, Generator::Kappa, &f).unwrap(), f);
    }

    #[test]
    fn casimir_on_rho_is_one() {
        let c = ctx();
        let f = GradedElement::radial(radial(&c, |r| r));
        let out = casimir_l(&c, &f).unwrap();
        let g = out.get(0, 0).unwrap();
        for v in g.samples() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn casimir_matches_box_on_radial() {
        let c = ctx();
        let g = radial(&c, |r| (r * 0.7).sin() * (-r).exp());
        let out = casimir_l(&c, &GradedElement::radial(g.clone())).unwrap();
        let b = box_op(&c, &g).unwrap();
        let cg = out.get(0, 0).unwrap();
        for (j, _) in b.lattice().iter() {
            let d = (cg.at(j).unwrap() - b.at(j).unwrap()).norm();
            assert!(
                d <= 1e-12 * (1.0 + b.at(j).unwrap().norm()) * c.qpow(-2 * j.max(0)),
                "{j}: {d}"
            );
        }
    }

    #[test]
    fn projections() {
        let c = ctx();
        let g = radial(&c, |r| r);
        let mut e = GradedElement::component(1, 1, g.clone());
        e.insert_add(0, 0, g.clone()).unwrap();
        e.insert_add(2, -1, g).unwrap();
        assert_eq!(sigma_grades(1, 1), (0, 1));
        let b = e.project_b();
        assert!(b.get(1, 1).is_some() && b.get(0, 0).is_some() && b.get(2, -1).is_none());
        assert_eq!(b.project_b(), b);
        let h = e.project_h();
        assert_eq!(h.components().count(), 1);
        assert!(h.get(0, 0).is_some());
    }
}
