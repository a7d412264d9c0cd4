//! Concrete matrix groups used by the built-in scenarios.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::lie::{LieAlgebraSpec, LieGroup};
use crate::math;
use crate::numerics::DenseMatrix;

/// The group of invertible affine transformations of the real line,
/// `t -> exp(theta) t + phi`, charted by `(theta, phi)` and represented as
/// `[[exp(theta), phi], [0, 1]]`.
///
/// The basis matrices `E1 = [[1,0],[0,0]]`, `E2 = [[0,1],[0,0]]` satisfy
/// `[E1, E2] = E2`, so the structure constant consistent with the
/// representation (and with the whole invariant-frame bracket table) is
/// `C^2_12 = +1`. The fundamental-field bracket has the opposite sign,
/// `[Etilde_1, Etilde_2] = -Etilde_2`, as the action is a left one.
pub fn affine_group() -> Result<LieGroup> {
    let d = 2;
    let mut c = vec![0.0; d * d * d];
    c[(0 * d + 1) * d + 1] = 1.0; // C^2_12 = +1
    c[(1 * d + 0) * d + 1] = -1.0;
    let basis = vec![
        DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]),
        DenseMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]),
    ];
    let algebra = LieAlgebraSpec::new(d, c, Some(basis))?;

    let coords_to_matrix = Box::new(|coords: &[f64]| -> Result<DenseMatrix> {
        if coords.len() != 2 {
            return Err(CoreError::DimensionMismatch { expected: 2, got: coords.len() });
        }
        Ok(DenseMatrix::from_rows(&[&[math::exp(coords[0]), coords[1]], &[0.0, 1.0]]))
    });
    let matrix_to_coords = Box::new(|m: &DenseMatrix| -> Result<Vec<f64>> {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(CoreError::DimensionMismatch { expected: 2, got: m.rows() });
        }
        if m.get(1, 0).abs() > 1e-9 || (m.get(1, 1) - 1.0).abs() > 1e-9 {
            return Err(CoreError::ChartOutOfRange("matrix is not an affine transformation"));
        }
        if m.get(0, 0) <= 0.0 {
            return Err(CoreError::ChartOutOfRange("affine scale factor must be positive"));
        }
        Ok(vec![math::ln(m.get(0, 0)), m.get(0, 1)])
    });
    Ok(LieGroup::new(algebra, coords_to_matrix, matrix_to_coords))
}

/// The abelian translation group of `R^d`, represented by `(d+1) x (d+1)`
/// homogeneous matrices. Its chart is the exponential chart.
pub fn translation_group(d: usize) -> Result<LieGroup> {
    let basis: Vec<DenseMatrix> = (0..d)
        .map(|a| {
            let mut e = DenseMatrix::zeros(d + 1, d + 1);
            e.set(a, d, 1.0);
            e
        })
        .collect();
    let algebra = LieAlgebraSpec::new(d, vec![0.0; d * d * d], Some(basis))?;

    let dd = d;
    let coords_to_matrix = Box::new(move |coords: &[f64]| -> Result<DenseMatrix> {
        if coords.len() != dd {
            return Err(CoreError::DimensionMismatch { expected: dd, got: coords.len() });
        }
        let mut m = DenseMatrix::identity(dd + 1);
        for (a, &v) in coords.iter().enumerate() {
            m.set(a, dd, v);
        }
        Ok(m)
    });
    let matrix_to_coords = Box::new(move |m: &DenseMatrix| -> Result<Vec<f64>> {
        if m.rows() != dd + 1 {
            return Err(CoreError::DimensionMismatch { expected: dd + 1, got: m.rows() });
        }
        for i in 0..=dd {
            for j in 0..dd {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (m.get(i, j) - expect).abs() > 1e-9 {
                    return Err(CoreError::ChartOutOfRange("matrix is not a translation"));
                }
            }
        }
        Ok((0..dd).map(|a| m.get(a, dd)).collect())
    });
    Ok(LieGroup::new(algebra, coords_to_matrix, matrix_to_coords))
}

/// SO(3) in the exponential (rotation-vector) chart with the standard basis
/// `(L_x, L_y, L_z)`, `[L_a, L_b] = eps_abc L_c`.
pub fn so3_group() -> Result<LieGroup> {
    let d = 3;
    let mut c = vec![0.0; d * d * d];
    let eps = [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)];
    for (a, b, k, v) in eps {
        c[(a * d + b) * d + k] = v;
        c[(b * d + a) * d + k] = -v;
    }
    let basis = vec![
        DenseMatrix::from_rows(&[&[0.0, 0.0, 0.0], &[0.0, 0.0, -1.0], &[0.0, 1.0, 0.0]]),
        DenseMatrix::from_rows(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0], &[-1.0, 0.0, 0.0]]),
        DenseMatrix::from_rows(&[&[0.0, -1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]),
    ];
    let algebra = LieAlgebraSpec::new(d, c, Some(basis))?;

    let algebra_for_chart = algebra.clone();
    let coords_to_matrix = Box::new(move |coords: &[f64]| -> Result<DenseMatrix> {
        let hat = algebra_for_chart.represent(coords)?;
        Ok(crate::numerics::mat_exp(&hat))
    });
    let matrix_to_coords = Box::new(|m: &DenseMatrix| -> Result<Vec<f64>> {
        rotation_log(m)
    });
    Ok(LieGroup::new(algebra, coords_to_matrix, matrix_to_coords))
}

/// Rotation-vector logarithm. The chart excludes angles near pi.
fn rotation_log(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.rows() != 3 || m.cols() != 3 {
        return Err(CoreError::DimensionMismatch { expected: 3, got: m.rows() });
    }
    if (m.det() - 1.0).abs() > 1e-6 {
        return Err(CoreError::ChartOutOfRange("matrix is not a rotation"));
    }
    let trace = m.get(0, 0) + m.get(1, 1) + m.get(2, 2);
    let cos_theta = ((trace - 1.0) / 2.0).clamp(-1.0, 1.0);
    if cos_theta < -0.999 {
        return Err(CoreError::ChartOutOfRange("rotation angle too close to pi"));
    }
    // (R - R^T)/2 = sin(theta) * hat(axis)
    let w = [
        0.5 * (m.get(2, 1) - m.get(1, 2)),
        0.5 * (m.get(0, 2) - m.get(2, 0)),
        0.5 * (m.get(1, 0) - m.get(0, 1)),
    ];
    let sin_theta = math::sqrt(w.iter().map(|x| x * x).sum::<f64>());
    let theta = math::atan2(sin_theta, cos_theta);
    let scale = if theta < 1e-8 { 1.0 } else { theta / sin_theta };
    Ok(w.iter().map(|x| x * scale).collect())
}

/// The zero-dimensional group, for systems with no symmetry to reduce.
pub fn trivial_group() -> Result<LieGroup> {
    let algebra = LieAlgebraSpec::new(0, Vec::new(), Some(Vec::new()))?;
    let coords_to_matrix = Box::new(|coords: &[f64]| -> Result<DenseMatrix> {
        if !coords.is_empty() {
            return Err(CoreError::DimensionMismatch { expected: 0, got: coords.len() });
        }
        Ok(DenseMatrix::zeros(0, 0))
    });
    let matrix_to_coords = Box::new(|_: &DenseMatrix| -> Result<Vec<f64>> { Ok(Vec::new()) });
    Ok(LieGroup::new(algebra, coords_to_matrix, matrix_to_coords))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so3_log_roundtrip() {
        let g = so3_group().unwrap();
        for y in [[0.3, -0.5, 0.7], [0.0, 0.0, 0.0], [1.2, 0.4, -0.3]] {
            let el = g.element_from_coords(&y).unwrap();
            for (a, b) in el.coords.iter().zip(&y) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn so3_rejects_near_pi() {
        let g = so3_group().unwrap();
        let almost_pi = [3.13, 0.0, 0.0];
        let m = (g.algebra.represent(&almost_pi)).map(|h| crate::numerics::mat_exp(&h)).unwrap();
        assert!(matches!(
            rotation_log(&m),
            Err(CoreError::ChartOutOfRange(_))
        ));
    }

    #[test]
    fn translation_composition() {
        let g = translation_group(2).unwrap();
        let a = g.element_from_coords(&[1.0, 2.0]).unwrap();
        let b = g.element_from_coords(&[-0.5, 3.0]).unwrap();
        let ab = g.left_multiply(&a, &b).unwrap();
        assert_eq!(ab.coords, vec![0.5, 5.0]);
    }
}
