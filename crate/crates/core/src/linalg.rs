//! Small dense symmetric-matrix helpers.
//!
//! Everything here operates on `k x k` matrices where `k` is the number of
//! network components, typically single digits, so a flat row-major `Vec<f64>`
//! is all that is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major `k x k` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    dim: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from nested rows; panics if the rows are not square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix rows must be square");
            data.extend_from_slice(row);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// y = M x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self[(i, j)] * x[j])
                    .sum::<f64>()
            })
            .collect()
    }

    /// u' M u.
    pub fn quad_form(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += u[i] * self[(i, j)] * u[j];
            }
        }
        acc
    }

    /// M M' (used to verify factorizations).
    pub fn mul_transpose(&self) -> Mat {
        let k = self.dim;
        let mut out = Mat::zeros(k);
        for i in 0..k {
            for j in 0..k {
                let mut acc = 0.0;
                for l in 0..k {
                    acc += self[(i, l)] * self[(j, l)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Scale every entry by `s` into a new matrix.
    pub fn scaled(&self, s: f64) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..i {
                let a = self[(i, j)];
                let b = self[(j, i)];
                if (a - b).abs() > tol * a.abs().max(b.abs()).max(1.0) {
                    return false;
                }
            }
        }
        true
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Relative tolerance below which a pivot is treated as exactly zero, and
/// beyond which (negatively) the input is rejected as indefinite.
const PIVOT_TOL: f64 = 1e-8;

/// Lower-triangular factor `L` with `L L' = psi`.
///
/// The input may be rank-deficient: a pivot within `1e-8 * max diagonal` of
/// zero zeroes out its whole column, which reproduces any true positive
/// semi-definite input to the same tolerance. A pivot below
/// `-1e-8 * max diagonal` is an error.
pub fn cholesky_factor(psi: &Mat) -> Result<Mat> {
    let k = psi.dim();
    let max_diag = (0..k).fold(0.0_f64, |m, i| m.max(psi[(i, i)].abs()));
    let tol = PIVOT_TOL * max_diag.max(f64::MIN_POSITIVE);
    let mut l = Mat::zeros(k);
    for j in 0..k {
        let mut d = psi[(j, j)];
        for p in 0..j {
            d -= l[(j, p)] * l[(j, p)];
        }
        if d < -tol {
            return Err(Error::NotPsd { col: j, pivot: d });
        }
        if d <= tol {
            // Numerically zero pivot: semi-definite direction, column stays zero.
            l[(j, j)] = 0.0;
            continue;
        }
        let root = d.sqrt();
        l[(j, j)] = root;
        for i in (j + 1)..k {
            let mut s = psi[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)];
            }
            l[(i, j)] = s / root;
        }
    }
    Ok(l)
}
