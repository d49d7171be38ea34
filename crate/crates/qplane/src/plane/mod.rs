//! The quantum plane: the radius operator `R = Δ(ρ)`, its sector
//! decomposition, the eigenvectors `e_ts` and functions of `R`.

mod calculus;
mod ets;
mod jacobi;
mod sector;
mod vector;

pub use calculus::*;
pub use ets::{eigen_residual, ets_vector, EigenResidual, EtsVector, SectorBasis};
pub use jacobi::{jacobi_eigen, SymmetricEigen};
pub use sector::{
    build_sector_matrix, compare_with, compare_with_radius_operator, DiagonalSector, SectorClosure,
    SectorComparison, SectorMatrix,
};
pub use vector::PlaneVector;
