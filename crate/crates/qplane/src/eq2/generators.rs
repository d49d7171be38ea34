//! The generators `z`, `υ` of the function algebra, the coproduct
//! operators `Z`, `V`, and the scalar product on the algebra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{LatticeOperator, TensorBasis, TruncatedBasis};
use crate::context::QContext;
use crate::error::Result;
use crate::qcalc::{jackson_sum, DecayClass, QLattice, WeightedPairing};

/// Classical phase variables ψ (of `z`) and φ (of `υ`), kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    psi: f64,
    phi: f64,
}

impl Default for PhaseParams {
    fn default() -> Self {
        PhaseParams { psi: 0.0, phi: 0.0 }
    }
}

impl PhaseParams {
    pub fn new(psi: f64, phi: f64) -> Self {
        let tau = std::f64::consts::TAU;
        PhaseParams {
            psi: psi.rem_euclid(tau),
            phi: phi.rem_euclid(tau),
        }
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn is_trivial(&self) -> bool {
        self.psi == 0.0 && self.phi == 0.0
    }
}

/// `z`, `z*`, `υ`, `υ*` on one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Generators {
    pub basis: TruncatedBasis,
    pub z: LatticeOperator,
    pub z_star: LatticeOperator,
    pub v: LatticeOperator,
    pub v_star: LatticeOperator,
}

/// `z e_j = e^(iψ) q^j e_j`, `υ e_j = e^(iφ) e_(j+1)`; the image of `e_L`
/// under `υ` leaves the window and is dropped.
pub fn build_generators(basis: TruncatedBasis, phases: PhaseParams, ctx: &QContext) -> Generators {
    let n = basis.dim();
    let ez = Complex64::from_polar(1.0, phases.psi());
    let ev = Complex64::from_polar(1.0, phases.phi());
    let z = LatticeOperator::from_entries(
        n,
        basis.labels().map(|j| {
            let i = basis.index(j).unwrap_or_default();
            (i, i, ez * ctx.qpow(j))
        }),
    )
    .expect("diagonal entries lie in the window")
    .with_grade((1, 0));
    let v = LatticeOperator::from_entries(
        n,
        basis
            .labels()
            .filter_map(|j| Some((basis.index(j + 1)?, basis.index(j)?, ev))),
    )
    .expect("shift entries lie in the window")
    .with_grade((0, 1));
    Generators {
        basis,
        z_star: z.adjoint(),
        v_star: v.adjoint(),
        z,
        v,
    }
}

/// Coproduct images `Z = z⊗υ⁻¹ + υ⊗z` and `V = υ⊗υ` on the tensor window
/// (with `υ⁻¹` realised as `υ*`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoproductOps {
    pub basis: TensorBasis,
    pub z: LatticeOperator,
    pub z_star: LatticeOperator,
    pub v: LatticeOperator,
    pub v_star: LatticeOperator,
}

pub fn build_coproduct_ops(
    basis: TruncatedBasis,
    phases: PhaseParams,
    ctx: &QContext,
) -> CoproductOps {
    let g = build_generators(basis, phases, ctx);
    let z =
        g.z.kron(&g.v_star)
            .add(&g.v.kron(&g.z))
            .expect("equal dimensions");
    let v = g.v.kron(&g.v);
    CoproductOps {
        basis: TensorBasis::square(basis),
        z_star: z.adjoint(),
        v_star: v.adjoint(),
        z,
        v,
    }
}

/// `R = Δ(ρ)` from its four-term expansion
/// `ρ⊗1 + 1⊗ρ + υz*⊗zυ + zυ*⊗υ*z*`.
pub fn radius_operator(
    basis: TruncatedBasis,
    phases: PhaseParams,
    ctx: &QContext,
) -> LatticeOperator {
    let g = build_generators(basis, phases, ctx);
    let one = LatticeOperator::identity(basis.dim());
    let rho = g.z.mul(&g.z_star).expect("equal dimensions");
    let t1 = rho.kron(&one);
    let t2 = one.kron(&rho);
    let t3 = g.v.mul(&g.z_star).unwrap().kron(&g.z.mul(&g.v).unwrap());
    let t4 =
        g.z.mul(&g.v_star)
            .unwrap()
            .kron(&g.v_star.mul(&g.z_star).unwrap());
    t1.add(&t2)
        .and_then(|s| s.add(&t3))
        .and_then(|s| s.add(&t4))
        .expect("equal dimensions")
}

/// One checked identity `lhs = rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub name: String,
    /// Largest interior entry of `lhs − rhs`.
    pub deviation: f64,
    /// Product of operand ∞-norms.
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn relation(
    name: &str,
    lhs: &LatticeOperator,
    rhs: &LatticeOperator,
    scale: f64,
    interior: &dyn Fn(usize) -> bool,
) -> RelationCheck {
    let diff = lhs.sub(rhs).expect("equal dimensions");
    let deviation = diff.max_abs_where(|r, c| interior(r) && interior(c));
    let tolerance = 100.0 * f64::EPSILON * scale;
    RelationCheck {
        name: name.to_string(),
        deviation,
        scale,
        tolerance,
        pass: deviation <= tolerance,
    }
}

/// `zυ = qυz`, `z*υ = qυz*`, `zz* = z*z` and `υ*υ = 1` on the interior.
pub fn check_relations(g: &Generators, ctx: &QContext) -> RelationReport {
    let q = Complex64::new(ctx.q(), 0.0);
    let b = g.basis;
    let interior = |i: usize| b.is_interior(b.label(i));
    let nz = g.z.inf_norm();
    let nv = g.v.inf_norm();
    let m = |a: &LatticeOperator, c: &LatticeOperator| a.mul(c).expect("equal dimensions");
    let checks = vec![
        relation(
            "z·υ − q·υ·z interior norm",
            &m(&g.z, &g.v),
            &m(&g.v, &g.z).scale(q),
            nz * nv,
            &interior,
        ),
        relation(
            "z*·υ − q·υ·z* interior norm",
            &m(&g.z_star, &g.v),
            &m(&g.v, &g.z_star).scale(q),
            nz * nv,
            &interior,
        ),
        relation(
            "z·z* − z*·z interior norm",
            &m(&g.z, &g.z_star),
            &m(&g.z_star, &g.z),
            nz * nz,
            &interior,
        ),
        relation(
            "υ*·υ − 1 interior norm",
            &m(&g.v_star, &g.v),
            &LatticeOperator::identity(b.dim()),
            nv * nv,
            &interior,
        ),
    ];
    RelationReport { checks }
}

/// `ZV = qVZ`, `Z*V = qVZ*`, `ZZ* = Z*Z` and `V*V = 1` on the interior.
pub fn check_coproduct_relations(c: &CoproductOps, ctx: &QContext) -> RelationReport {
    let q = Complex64::new(ctx.q(), 0.0);
    let b = c.basis;
    let interior = |i: usize| {
        let (x, y) = b.label(i);
        b.is_interior(x, y)
    };
    let nz = c.z.inf_norm();
    let nv = c.v.inf_norm();
    let m = |a: &LatticeOperator, d: &LatticeOperator| a.mul(d).expect("equal dimensions");
    let checks = vec![
        relation(
            "Z·V − q·V·Z interior norm",
            &m(&c.z, &c.v),
            &m(&c.v, &c.z).scale(q),
            nz * nv,
            &interior,
        ),
        relation(
            "Z*·V − q·V·Z* interior norm",
            &m(&c.z_star, &c.v),
            &m(&c.v, &c.z_star).scale(q),
            nz * nv,
            &interior,
        ),
        relation(
            "Z·Z* − Z*·Z interior norm",
            &m(&c.z, &c.z_star),
            &m(&c.z_star, &c.z),
            nz * nz,
            &interior,
        ),
        relation(
            "V*·V − 1 interior norm",
            &m(&c.v_star, &c.v),
            &LatticeOperator::identity(b.dim()),
            nv * nv,
            &interior,
        ),
    ];
    RelationReport { checks }
}

/// `(F, G)_A = (1−q²)·Σ_j q^(2j)·(e_j, F*G e_j)` over the window.
///
/// Reports divergence when the weighted diagonal does not decay at the
/// window ends, the windowed form of the membership condition
/// `Σ q^(2j)(e_j, F*F e_j) < ∞`.
pub fn scalar_product_a(
    ctx: &QContext,
    basis: TruncatedBasis,
    f: &LatticeOperator,
    g: &LatticeOperator,
) -> Result<WeightedPairing> {
    let h = f.adjoint().mul(g)?;
    let lat = QLattice::symmetric(ctx, basis.half_width())?;
    let terms: Vec<Complex64> = (0..basis.dim()).map(|i| h.get(i, i)).collect();
    jackson_sum(ctx, &lat, &terms, DecayClass::Unrestricted)
}

/// `(F₁⊗F₂, F₃⊗F₄) = (F₁, F₃)_A·(F₂, F₄)_A`.
pub fn tensor_pairing(
    ctx: &QContext,
    basis: TruncatedBasis,
    f1: &LatticeOperator,
    f2: &LatticeOperator,
    f3: &LatticeOperator,
    f4: &LatticeOperator,
) -> Result<Complex64> {
    Ok(scalar_product_a(ctx, basis, f1, f3)?.value * scalar_product_a(ctx, basis, f2, f4)?.value)
}

/// Weighted trace on the tensor window,
/// `(1−q²)²·Σ_(a,b) q^(2a)q^(2b)·((e_a⊗e_b), F*G (e_a⊗e_b))`.
pub fn scalar_product_tensor(
    ctx: &QContext,
    basis: TensorBasis,
    f: &LatticeOperator,
    g: &LatticeOperator,
) -> Result<Complex64> {
    let h = f.adjoint().mul(g)?;
    let la = QLattice::symmetric(ctx, basis.left.half_width())?;
    let lb = QLattice::symmetric(ctx, basis.right.half_width())?;
    let w = (1.0 - ctx.q2()) * (1.0 - ctx.q2());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..basis.dim() {
        let (a, b) = basis.label(i);
        acc += h.get(i, i) * (la.rho(a) * lb.rho(b));
    }
    Ok(acc * w)
}
