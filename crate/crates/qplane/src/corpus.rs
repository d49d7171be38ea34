//! Admissible test functions for the weak identities: smooth on `[0, ∞)`,
//! summable against the Jackson measure and with a known value at 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::context::QContext;
use crate::error::Result;
use crate::qcalc::{DecayClass, QLattice, RadialFunction};
use crate::qspecial::{bessel_j_at, Argument};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    /// `exp(1 − 1/(1 − (ρ/width)²))` on `[0, width)`, zero beyond.
    Bump { width: f64 },
    /// `ρ^k·e^(−ρ)`.
    PowerExp { k: i32 },
    /// `𝒥(√(pρ))·e^(−ρ)`.
    BesselCutoff { p: f64 },
}

/// The five standard corpus members.
pub fn corpus() -> Vec<TestFunction> {
    vec![
        TestFunction::Bump { width: 4.0 },
        TestFunction::PowerExp { k: 0 },
        TestFunction::PowerExp { k: 1 },
        TestFunction::PowerExp { k: 2 },
        TestFunction::BesselCutoff { p: 1.0 },
    ]
}

impl TestFunction {
    pub fn name(&self) -> String {
        match *self {
            TestFunction::Bump { width } => format!("bump(w={width})"),
            TestFunction::PowerExp { k: 0 } => "exp(-rho)".into(),
            TestFunction::PowerExp { k: 1 } => "rho*exp(-rho)".into(),
            TestFunction::PowerExp { k } => format!("rho^{k}*exp(-rho)"),
            TestFunction::BesselCutoff { p } => format!("J(sqrt({p}*rho))*exp(-rho)"),
        }
    }

    /// Exact value at `ρ = 0`.
    pub fn zero_value(&self) -> f64 {
        match *self {
            TestFunction::Bump { .. } => 1.0,
            TestFunction::PowerExp { k } => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::BesselCutoff { .. } => 1.0,
        }
    }

    pub fn decay(&self) -> DecayClass {
        match self {
            TestFunction::Bump { .. } => DecayClass::CompactSupport,
            _ => DecayClass::Summable,
        }
    }

    pub fn eval(&self, ctx: &QContext, rho: f64) -> Result<f64> {
        Ok(match *self {
            TestFunction::Bump { width } => {
                let u = rho / width;
                if u >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                }
            }
            TestFunction::PowerExp { k } => {
                if rho > 800.0 {
                    0.0
                } else {
                    rho.powi(k) * (-rho).exp()
                }
            }
            TestFunction::BesselCutoff { p } => {
                if rho > 745.0 {
                    0.0
                } else {
                    bessel_j_at(ctx, 0, &Argument::Product { p, rho })?.value.re * (-rho).exp()
                }
            }
        })
    }

    /// Samples on the window with the exact zero limit attached.
    pub fn sample(&self, ctx: &QContext, lattice: &QLattice) -> Result<RadialFunction> {
        let samples = lattice
            .points()
            .iter()
            .map(|&r| self.eval(ctx, r).map(|v| Complex64::new(v, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RadialFunction::new(lattice.clone(), samples, self.decay())?
            .with_zero_limit(Complex64::new(self.zero_value(), 0.0)))
    }
}
