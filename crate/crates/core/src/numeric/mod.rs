//! Dense linear algebra and norm evaluation shared by every other module.
//!
//! Everything is `f64`. Vectors and matrices validate finiteness on
//! construction so downstream code can assume it.

mod linalg;
mod norm;
pub(crate) mod qp;
mod svd;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use linalg::{pseudo_inverse, rank, upper_factor};
pub use norm::{norm, DualNorm, NormSpec};
pub use qp::{least_norm_solve, AffineConstraint, ConstraintKind, EuclideanQp, LeastNormSolution, SolveError};
pub use svd::{svd, Svd};

/// Finite truncation of a coefficient sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CoeffVector(Vec<f64>);

impl CoeffVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_finite(&entries)?;
        Ok(CoeffVector(entries))
    }

    pub fn zeros(n: usize) -> Self {
        CoeffVector(vec![0.0; n])
    }

    /// The `i`-th canonical vector of length `n` (zero-based `i`).
    pub fn canonical(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        CoeffVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }
}

impl TryFrom<Vec<f64>> for CoeffVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        CoeffVector::new(v)
    }
}

impl From<CoeffVector> for Vec<f64> {
    fn from(v: CoeffVector) -> Self {
        v.0
    }
}

impl std::ops::Deref for CoeffVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Dense real matrix, row-major. Serializes as a list of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CoeffMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CoeffMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidFrame(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(CoeffMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        CoeffMatrix::new(m, n, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        CoeffMatrix { rows: n, cols: n, data }
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, x) in d.iter().enumerate() {
            data[i * n + i] = *x;
        }
        CoeffMatrix::new(n, n, data)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        CoeffMatrix::new(m.nrows(), m.ncols(), data)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> CoeffMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        CoeffMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn matmul(&self, other: &CoeffMatrix) -> Result<CoeffMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        CoeffMatrix::from_dmatrix(&(self.to_dmatrix() * other.to_dmatrix()))
    }

    pub fn scaled(&self, factor: f64) -> CoeffMatrix {
        CoeffMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl TryFrom<Vec<Vec<f64>>> for CoeffMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        CoeffMatrix::from_rows(&rows)
    }
}

impl From<CoeffMatrix> for Vec<Vec<f64>> {
    fn from(m: CoeffMatrix) -> Self {
        (0..m.rows).map(|i| m.row(i).to_vec()).collect()
    }
}

pub(crate) fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm with scaling against overflow.
pub(crate) fn l2(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
