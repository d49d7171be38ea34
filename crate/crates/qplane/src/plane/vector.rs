//! Vectors on the truncated tensor grid `e_a⊗e_b`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sector::DiagonalSector;
use crate::eq2::{TensorBasis, TruncatedBasis};
use crate::error::{QError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneVector {
    basis: TruncatedBasis,
    coefficients: Vec<Complex64>,
}

impl PlaneVector {
    pub fn zeros(basis: TruncatedBasis) -> Self {
        let n = TensorBasis::square(basis).dim();
        PlaneVector {
            basis,
            coefficients: vec![Complex64::default(); n],
        }
    }

    /// `e_a⊗e_b`.
    pub fn basis_vector(basis: TruncatedBasis, a: i64, b: i64) -> Result<Self> {
        let mut v = Self::zeros(basis);
        v.set(a, b, Complex64::new(1.0, 0.0))?;
        Ok(v)
    }

    pub fn from_coefficients(basis: TruncatedBasis, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != TensorBasis::square(basis).dim() {
            return Err(QError::InvalidParameter(format!(
                "{} coefficients for a grid of {}",
                coefficients.len(),
                TensorBasis::square(basis).dim()
            )));
        }
        Ok(PlaneVector {
            basis,
            coefficients,
        })
    }

    pub fn basis(&self) -> TruncatedBasis {
        self.basis
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    fn tensor(&self) -> TensorBasis {
        TensorBasis::square(self.basis)
    }

    pub fn get(&self, a: i64, b: i64) -> Option<Complex64> {
        self.tensor().index(a, b).map(|i| self.coefficients[i])
    }

    pub fn set(&mut self, a: i64, b: i64, value: Complex64) -> Result<()> {
        let i = self
            .tensor()
            .index(a, b)
            .ok_or_else(|| QError::Window(format!("e_{a}⊗e_{b} lies outside the grid")))?;
        self.coefficients[i] = value;
        Ok(())
    }

    /// `(a, b, value)` for every nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        let tb = self.tensor();
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != Complex64::default())
            .map(move |(i, v)| {
                let (a, b) = tb.label(i);
                (a, b, *v)
            })
    }

    /// Sectors `s = a − b` carrying nonzero coefficients, in increasing order.
    pub fn sectors(&self) -> Vec<i64> {
        let mut s: Vec<i64> = self.support().map(|(a, b, _)| a - b).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn is_interior(&self) -> bool {
        let tb = self.tensor();
        self.support().all(|(a, b, _)| tb.is_interior(a, b))
    }

    /// Coefficients of `e_(s+j)⊗e_j` for `j` across the sector window.
    pub fn sector_part(&self, sector: &DiagonalSector) -> Vec<Complex64> {
        sector
            .indices()
            .map(|j| self.get(sector.s + j, j).unwrap_or_default())
            .collect()
    }

    /// Add `Σ_j c_j e_(s+j)⊗e_j`.
    pub fn add_sector(&mut self, sector: &DiagonalSector, c: &[Complex64]) -> Result<()> {
        if c.len() != sector.len() {
            return Err(QError::InvalidParameter(
                "sector coefficient length mismatch".into(),
            ));
        }
        for (j, v) in sector.indices().zip(c) {
            let i = self.tensor().index(sector.s + j, j).ok_or_else(|| {
                QError::Window(format!(
                    "sector s = {} leaves the grid at j = {j}",
                    sector.s
                ))
            })?;
            self.coefficients[i] += v;
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        PlaneVector {
            basis: self.basis,
            coefficients: self.coefficients.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.basis != other.basis {
            return Err(QError::InvalidParameter(
                "plane vectors on different grids".into(),
            ));
        }
        Ok(PlaneVector {
            basis: self.basis,
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn dot(&self, other: &Self) -> Result<Complex64> {
        if self.basis != other.basis {
            return Err(QError::InvalidParameter(
                "plane vectors on different grids".into(),
            ));
        }
        Ok(self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}
