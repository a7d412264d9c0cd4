//! Dense row-major matrices with LU solves and the matrix exponential.
//!
//! Matrices in this crate are tiny (velocity Hessians and adjoint matrices,
//! at most ~10x10), so everything is direct: partial-pivot LU, no blocking,
//! no factorization caching.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};

/// Relative pivot tolerance: a pivot below `RELATIVE_PIVOT_TOL * max|entry|`
/// signals a singular matrix (for Hessians: a non-regular Lagrangian).
const RELATIVE_PIVOT_TOL: f64 = 1e-12;

/// A dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row slices. All rows must have equal length.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must equal rows*cols");
        Self { rows, cols, data }
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

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mat_mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "vector length must equal cols");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self.get(i, j) * x[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let data = self.data.iter().map(|v| v * c).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Max-absolute-entry norm.
    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Solves `A x = b` by LU decomposition with partial pivoting.
    ///
    /// Fails with [`CoreError::SingularMatrix`] when a pivot falls below
    /// `1e-12 * max|entry|`; on a Hessian this signals a non-regular
    /// Lagrangian at the evaluation state.
    pub fn lu_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if self.rows != self.cols {
            return Err(CoreError::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        if b.len() != self.rows {
            return Err(CoreError::DimensionMismatch { expected: self.rows, got: b.len() });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Vec::new());
        }
        let tol = RELATIVE_PIVOT_TOL * self.norm_inf();
        let mut a = self.data.clone();
        let mut x: Vec<f64> = b.to_vec();

        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_val = a[col * n + col].abs();
            for r in (col + 1)..n {
                let v = a[r * n + col].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = r;
                }
            }
            if pivot_val <= tol {
                return Err(CoreError::SingularMatrix);
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                }
                x.swap(col, pivot_row);
            }
            let inv_p = 1.0 / a[col * n + col];
            for r in (col + 1)..n {
                let factor = a[r * n + col] * inv_p;
                if factor == 0.0 {
                    continue;
                }
                a[r * n + col] = 0.0;
                for j in (col + 1)..n {
                    a[r * n + j] -= factor * a[col * n + j];
                }
                x[r] -= factor * x[col];
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= a[i * n + j] * x[j];
            }
            x[i] = acc / a[i * n + i];
        }
        Ok(x)
    }

    /// Matrix inverse via column-by-column LU solves.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.lu_solve(&e)?;
            e[j] = 0.0;
            for i in 0..n {
                out.set(i, j, col[i]);
            }
        }
        Ok(out)
    }

    /// Determinant from the pivoted LU factors.
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "determinant requires a square matrix");
        let n = self.rows;
        if n == 0 {
            return 1.0;
        }
        let mut a = self.data.clone();
        let mut sign = 1.0;
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_val = a[col * n + col].abs();
            for r in (col + 1)..n {
                let v = a[r * n + col].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = r;
                }
            }
            if pivot_val == 0.0 {
                return 0.0;
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                }
                sign = -sign;
            }
            for r in (col + 1)..n {
                let factor = a[r * n + col] / a[col * n + col];
                for j in col..n {
                    a[r * n + j] -= factor * a[col * n + j];
                }
            }
        }
        let mut det = sign;
        for i in 0..n {
            det *= a[i * n + i];
        }
        det
    }
}

/// Matrix exponential by scaling-and-squaring over a degree-10 Taylor series.
///
/// The input is scaled by `2^-s` until its norm is at most 1/4, the series is
/// summed, and the result squared back. Adequate for the small (d <= 6) Lie
/// algebra representations used in reconstruction.
pub fn mat_exp(x: &DenseMatrix) -> DenseMatrix {
    assert_eq!(x.rows(), x.cols(), "matrix exponential requires a square matrix");
    let n = x.rows();
    let norm = x.norm_inf();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let xs = x.scale(scale);

    let mut result = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..=10 {
        term = term.mat_mul(&xs).scale(1.0 / k as f64);
        result = result.add(&term);
    }
    for _ in 0..squarings {
        result = result.mat_mul(&result);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{x} vs {y} (tol {tol})");
        }
    }

    #[test]
    fn lu_identity() {
        let a = DenseMatrix::identity(3);
        let x = a.lu_solve(&[1.0, 2.0, 3.0]).unwrap();
        assert_vec_close(&x, &[1.0, 2.0, 3.0], 0.0);
    }

    #[test]
    fn lu_diagonal() {
        let a = DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
        let x = a.lu_solve(&[2.0, 8.0]).unwrap();
        assert_vec_close(&x, &[1.0, 2.0], 0.0);
    }

    /// Independent oracle: solve a 3x3 system via the adjugate/determinant
    /// closed form and compare. The matrix is the affine-example Hessian in
    /// the invariant frame at q = 2, phidot = 1, phi = 0.
    #[test]
    fn lu_against_adjugate_oracle() {
        // Hessian blocks at (q, phi, phidot) = (2, 0, 1), frame order
        // (fiber, fiber, base): [[1, 0, 2], [0, -1, 0], [2, 0, 1]].
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0, 2.0], &[0.0, -1.0, 0.0], &[2.0, 0.0, 1.0]]);
        let b = [1.0, 0.0, 0.0];

        fn cofactor(m: &DenseMatrix, i: usize, j: usize) -> f64 {
            let mut sub = [0.0; 4];
            let mut k = 0;
            for r in 0..3 {
                for c in 0..3 {
                    if r != i && c != j {
                        sub[k] = m.get(r, c);
                        k += 1;
                    }
                }
            }
            let minor = sub[0] * sub[3] - sub[1] * sub[2];
            if (i + j) % 2 == 0 {
                minor
            } else {
                -minor
            }
        }

        let det = (0..3).map(|j| a.get(0, j) * cofactor(&a, 0, j)).sum::<f64>();
        let mut expected = [0.0; 3];
        for i in 0..3 {
            // x = adj(A) b / det, adj(A)[i][j] = cofactor(A, j, i)
            expected[i] = (0..3).map(|j| cofactor(&a, j, i) * b[j]).sum::<f64>() / det;
        }

        let x = a.lu_solve(&b).unwrap();
        assert_vec_close(&x, &expected, 1e-14);
        let residual = a.mat_vec(&x).iter().zip(&b).map(|(ax, bi)| (ax - bi).abs()).fold(0.0_f64, f64::max);
        assert!(residual <= 1e-10 * (1.0 + 1.0));
    }

    #[test]
    fn lu_singular_is_rejected() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(a.lu_solve(&[1.0, 1.0]), Err(CoreError::SingularMatrix));
    }

    #[test]
    fn exp_zero_is_identity() {
        let e = mat_exp(&DenseMatrix::zeros(3, 3));
        assert!(e.sub(&DenseMatrix::identity(3)).norm_inf() == 0.0);
    }

    #[test]
    fn exp_nilpotent_is_exact() {
        let x = DenseMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e = mat_exp(&x);
        let expected = DenseMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(e.sub(&expected).norm_inf() <= 1e-15);
    }

    #[test]
    fn exp_diagonal_generator() {
        // theta * E1 in the affine representation, theta = 0.5.
        let theta = 0.5;
        let x = DenseMatrix::from_rows(&[&[theta, 0.0], &[0.0, 0.0]]);
        let e = mat_exp(&x);
        assert!((e.get(0, 0) - theta.exp()).abs() <= 1e-12);
        assert!((e.get(0, 1)).abs() <= 1e-15);
        assert!((e.get(1, 0)).abs() <= 1e-15);
        assert!((e.get(1, 1) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn exp_inverse_consistency() {
        let x = DenseMatrix::from_rows(&[&[0.3, -1.2, 0.5], &[0.8, 0.1, -0.4], &[-0.2, 0.6, 0.9]]);
        let prod = mat_exp(&x).mat_mul(&mat_exp(&x.scale(-1.0)));
        assert!(prod.sub(&DenseMatrix::identity(3)).norm_inf() <= 1e-10);
    }

    #[test]
    fn det_of_triangular_product() {
        let a = DenseMatrix::from_rows(&[&[2.0, 1.0], &[0.0, 3.0]]);
        assert!((a.det() - 6.0).abs() <= 1e-14);
        let b = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((b.det() + 1.0).abs() <= 1e-14);
    }
}
