//! Harmonic analysis on the quantum plane `E_q² = E_q(2)/U(1)`.
//!
//! The crate is organised in layers:
//!
//! * [`qcalc`]: q-numbers, the lattice `ρ_j = q^(2j)`, Jackson sums, the
//!   difference operators `D₊`, `D₋` and the radial Casimir `□ = D₋ρD₊`.
//! * [`qspecial`]: the Hahn–Exton q-Bessel function 𝒥 (and integer orders
//!   𝒥_s), the q-Neumann function 𝒩, the Green function `𝒢 = 𝒩 − i𝒥` and
//!   its spectral representation.
//! * [`eq2`]: the operators `z`, `υ` on a truncated `ℓ²(ℤ)` window, the
//!   coproduct operators, graded elements of the function algebra and the
//!   representation `ℒ` of `U_q(e(2))`.
//! * [`plane`]: the radius operator `R = Δ(ρ)`, its sector matrices, the
//!   eigenvectors `e_ts` and the Green operator `𝒢ᵖ(R)`.
//! * [`verify`]: self-checks grouped in suites, used by the CLI.
//!
//! ```
//! use qplane::{QContext, qspecial::bessel_j};
//!
//! let ctx = QContext::new(0.5).unwrap();
//! assert_eq!(bessel_j(&ctx, 0.0).unwrap().value.re, 1.0);
//! ```

pub mod context;
pub mod corpus;
pub mod eq2;
pub mod error;
pub mod ext;
pub mod plane;
pub mod qcalc;
pub mod qspecial;
pub mod verify;

pub use context::{PrecisionMode, QContext};
pub use error::{QError, Result};
pub use ext::ExtReal;
pub use qcalc::{DecayClass, QLattice, RadialFunction, WeightedPairing};
pub use qspecial::{GreenParams, SeriesResult, SpectralEvalParams, SpectralLattice};
