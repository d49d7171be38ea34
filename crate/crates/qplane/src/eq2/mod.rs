//! The `E_q(2)` function algebra on a truncated `ℓ²(ℤ)` window.

mod generators;
mod graded;
mod operator;

pub use generators::{
    build_coproduct_ops, build_generators, check_coproduct_relations, check_relations,
    radius_operator, scalar_product_a, scalar_product_tensor, tensor_pairing, CoproductOps,
    Generators, PhaseParams, RelationCheck, RelationReport,
};
pub use graded::{
    casimir_displayed, casimir_l, casimir_l_magnitude, normwise_residual, rep_l, rep_l_magnitude,
    rep_l_word, rep_l_word_magnitude, sigma_grades, Generator, GradedElement,
};
pub use operator::{LatticeOperator, TensorBasis, TruncatedBasis};
