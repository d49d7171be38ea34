//! Sparse operators on truncated `ℓ²(ℤ)` windows and their tensor squares.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};

/// Basis `e_(−L)..e_L` of a truncated `ℓ²(ℤ)`; indices within `margin` of
/// either end are outside the interior where relations are claimed exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedBasis {
    half_width: i64,
    margin: i64,
}

impl TruncatedBasis {
    pub fn new(half_width: i64, margin: i64) -> Result<Self> {
        if margin < 1 || half_width < margin {
            return Err(QError::Window(format!(
                "basis needs L ≥ margin ≥ 1, got L = {half_width}, margin = {margin}"
            )));
        }
        Ok(TruncatedBasis { half_width, margin })
    }

    pub fn half_width(&self) -> i64 {
        self.half_width
    }

    pub fn margin(&self) -> i64 {
        self.margin
    }

    pub fn dim(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    pub fn index(&self, j: i64) -> Option<usize> {
        (j.abs() <= self.half_width).then(|| (j + self.half_width) as usize)
    }

    pub fn label(&self, i: usize) -> i64 {
        i as i64 - self.half_width
    }

    pub fn labels(&self) -> impl Iterator<Item = i64> {
        -self.half_width..=self.half_width
    }

    pub fn is_interior(&self, j: i64) -> bool {
        j.abs() <= self.half_width - self.margin
    }
}

/// Product basis `e_a ⊗ e_b`, indexed `(a + L₁)·n₂ + (b + L₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorBasis {
    pub left: TruncatedBasis,
    pub right: TruncatedBasis,
}

impl TensorBasis {
    pub fn square(basis: TruncatedBasis) -> Self {
        TensorBasis {
            left: basis,
            right: basis,
        }
    }

    pub fn dim(&self) -> usize {
        self.left.dim() * self.right.dim()
    }

    pub fn index(&self, a: i64, b: i64) -> Option<usize> {
        Some(self.left.index(a)? * self.right.dim() + self.right.index(b)?)
    }

    pub fn label(&self, i: usize) -> (i64, i64) {
        let n = self.right.dim();
        (self.left.label(i / n), self.right.label(i % n))
    }

    pub fn is_interior(&self, a: i64, b: i64) -> bool {
        self.left.is_interior(a) && self.right.is_interior(b)
    }
}

/// Finite sparse matrix, stored by rows with columns in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeOperator {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
    /// `row − col` when every entry lies on a single diagonal.
    shift: Option<i64>,
    /// `(z-grade, υ-power)` when the operator is homogeneous.
    grade: Option<(i64, i64)>,
}

fn merge_row(mut entries: Vec<(usize, Complex64)>) -> Vec<(usize, Complex64)> {
    entries.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, Complex64)> = Vec::with_capacity(entries.len());
    for (c, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|e| e.1 != Complex64::new(0.0, 0.0));
    out
}

impl LatticeOperator {
    pub fn zeros(dim: usize) -> Self {
        LatticeOperator {
            dim,
            rows: vec![Vec::new(); dim],
            shift: None,
            grade: None,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| vec![(i, Complex64::new(1.0, 0.0))])
            .collect();
        LatticeOperator {
            dim,
            rows,
            shift: Some(0),
            grade: Some((0, 0)),
        }
    }

    /// Build from `(row, col, value)` triples; repeated positions add up.
    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        let mut rows = vec![Vec::new(); dim];
        for (r, c, v) in entries {
            if r >= dim || c >= dim {
                return Err(QError::Window(format!(
                    "entry ({r}, {c}) outside dimension {dim}"
                )));
            }
            rows[r].push((c, v));
        }
        let rows: Vec<_> = rows.into_iter().map(merge_row).collect();
        let mut op = LatticeOperator {
            dim,
            rows,
            shift: None,
            grade: None,
        };
        op.shift = op.detect_shift();
        Ok(op)
    }

    fn detect_shift(&self) -> Option<i64> {
        let mut shift = None;
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, _) in row {
                let s = r as i64 - c as i64;
                match shift {
                    None => shift = Some(s),
                    Some(t) if t != s => return None,
                    _ => {}
                }
            }
        }
        shift
    }

    pub fn with_grade(mut self, grade: (i64, i64)) -> Self {
        self.grade = Some(grade);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shift(&self) -> Option<i64> {
        self.shift
    }

    pub fn grade(&self) -> Option<(i64, i64)> {
        self.grade
    }

    pub fn row(&self, r: usize) -> &[(usize, Complex64)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.rows[r]
            .binary_search_by_key(&c, |e| e.0)
            .map(|i| self.rows[r][i].1)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// All stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(QError::Window(format!(
                "operators of dimension {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = Vec::new();
                for &(k, a) in row {
                    for &(c, b) in &other.rows[k] {
                        acc.push((c, a * b));
                    }
                }
                merge_row(acc)
            })
            .collect();
        let mut op = LatticeOperator {
            dim: self.dim,
            rows,
            shift: None,
            grade: None,
        };
        op.shift = op.detect_shift();
        op.grade = match (self.grade, other.grade) {
            (Some((m1, j1)), Some((m2, j2))) => Some((m1 + m2, j1 + j2)),
            _ => None,
        };
        Ok(op)
    }

    fn combine(&self, other: &Self, b: Complex64) -> Result<Self> {
        self.check_dim(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(ra, rb)| {
                let mut acc: Vec<_> = ra.clone();
                acc.extend(rb.iter().map(|&(c, v)| (c, v * b)));
                merge_row(acc)
            })
            .collect();
        let mut op = LatticeOperator {
            dim: self.dim,
            rows,
            shift: None,
            grade: None,
        };
        op.shift = op.detect_shift();
        op.grade = if self.grade == other.grade {
            self.grade
        } else {
            None
        };
        Ok(op)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| merge_row(row.iter().map(|&(k, v)| (k, v * c)).collect()))
            .collect();
        LatticeOperator {
            dim: self.dim,
            rows,
            shift: self.shift,
            grade: self.grade,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for (r, c, v) in self.entries() {
            rows[c].push((r, v.conj()));
        }
        let rows = rows.into_iter().map(merge_row).collect();
        LatticeOperator {
            dim: self.dim,
            rows,
            shift: self.shift.map(|s| -s),
            grade: self.grade.map(|(m, j)| (-m, -j)),
        }
    }

    /// Kronecker product, laid out as in [`TensorBasis`].
    pub fn kron(&self, other: &Self) -> Self {
        let n2 = other.dim;
        let dim = self.dim * n2;
        let mut rows = vec![Vec::new(); dim];
        for (r1, row1) in self.rows.iter().enumerate() {
            for (r2, row2) in other.rows.iter().enumerate() {
                let row = &mut rows[r1 * n2 + r2];
                for &(c1, a) in row1 {
                    for &(c2, b) in row2 {
                        row.push((c1 * n2 + c2, a * b));
                    }
                }
            }
        }
        let rows = rows.into_iter().map(merge_row).collect();
        LatticeOperator {
            dim,
            rows,
            shift: None,
            grade: None,
        }
    }

    /// Apply to a coefficient vector.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(QError::Window(format!(
                "vector of length {} for dimension {}",
                v.len(),
                self.dim
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(Complex64::new(0.0, 0.0), |acc, &(c, a)| acc + a * v[c])
            })
            .collect())
    }

    /// Largest `|entry|` over positions accepted by `keep(row, col)`.
    pub fn max_abs_where(&self, keep: impl Fn(usize, usize) -> bool) -> f64 {
        self.entries()
            .filter(|&(r, c, _)| keep(r, c))
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Operator ∞-norm (largest absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.iter().map(|e| e.1.norm()).fold(0.0, |a, b| a + b))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn product_and_adjoint() {
        let a =
            LatticeOperator::from_entries(3, [(1, 0, c(2.0)), (2, 1, Complex64::new(0.0, 1.0))])
                .unwrap();
        assert_eq!(a.shift(), Some(1));
        let aa = a.mul(&a).unwrap();
        assert_eq!(aa.get(2, 0), Complex64::new(0.0, 2.0));
        assert_eq!(aa.shift(), Some(2));
        let ad = a.adjoint();
        assert_eq!(ad.get(1, 2), Complex64::new(0.0, -1.0));
        assert_eq!(ad.shift(), Some(-1));
        let zero = a.sub(&a).unwrap();
        assert_eq!(zero.entries().count(), 0);
    }

    #[test]
    fn kron_layout_matches_tensor_basis() {
        let b = TruncatedBasis::new(1, 1).unwrap();
        let tb = TensorBasis::square(b);
        let shift = LatticeOperator::from_entries(3, [(1, 0, c(1.0)), (2, 1, c(1.0))]).unwrap();
        let diag =
            LatticeOperator::from_entries(3, (0..3).map(|i| (i, i, c(i as f64 + 1.0)))).unwrap();
        let k = shift.kron(&diag);
        let from = tb.index(-1, 1).unwrap();
        let to = tb.index(0, 1).unwrap();
        assert_eq!(k.get(to, from), c(3.0));
        assert_eq!(tb.label(to), (0, 1));
    }
}
