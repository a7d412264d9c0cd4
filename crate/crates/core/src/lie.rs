//! Lie algebras and matrix Lie groups.
//!
//! A [`LieAlgebraSpec`] holds the dimension, the structure constants
//! `C^c_{ab}` with `[E_a, E_b] = C^c_{ab} E_c`, and (optionally) a matrix
//! representation of the basis. Construction validates antisymmetry, the
//! Jacobi identity, and consistency of the basis bracket with the structure
//! constants, so an ill-formed algebra never reaches the dynamics.
//!
//! Group elements carry both chart coordinates and a representation matrix:
//! reconstruction composes group actions in coordinates while the ODE on the
//! group is stepped in the matrix picture, and keeping both avoids repeated
//! chart inversions. Chart maps (coords <-> matrix) are supplied per group;
//! there is no generic logarithm here.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::numerics::{dual_solve, mat_exp, DenseMatrix, Dual2};

/// Entrywise tolerance for the construction-time algebra checks.
const ALGEBRA_TOL: f64 = 1e-12;

/// A finite-dimensional real Lie algebra given by structure constants.
#[derive(Debug, Clone)]
pub struct LieAlgebraSpec {
    dim: usize,
    /// `C^c_{ab}` stored flat as `[(a * dim + b) * dim + c]`.
    structure: Vec<f64>,
    basis: Option<Vec<DenseMatrix>>,
}

impl LieAlgebraSpec {
    /// Validates and stores an algebra.
    ///
    /// `structure[(a*d + b)*d + c]` is `C^c_{ab}`. Fails when antisymmetry or
    /// the Jacobi identity is violated beyond `1e-12`, or when the basis
    /// matrices do not realize the bracket.
    pub fn new(
        dim: usize,
        structure: Vec<f64>,
        basis: Option<Vec<DenseMatrix>>,
    ) -> Result<Self> {
        if structure.len() != dim * dim * dim {
            return Err(CoreError::DimensionMismatch {
                expected: dim * dim * dim,
                got: structure.len(),
            });
        }
        let spec = Self { dim, structure, basis };

        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    let skew = spec.c(a, b, c) + spec.c(b, a, c);
                    if skew.abs() > ALGEBRA_TOL {
                        return Err(CoreError::InvalidParameter(
                            "structure constants are not antisymmetric",
                        ));
                    }
                }
            }
        }
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for f in 0..dim {
                        let mut acc = 0.0;
                        for e in 0..dim {
                            acc += spec.c(a, b, e) * spec.c(e, c, f)
                                + spec.c(b, c, e) * spec.c(e, a, f)
                                + spec.c(c, a, e) * spec.c(e, b, f);
                        }
                        if acc.abs() > ALGEBRA_TOL {
                            return Err(CoreError::InvalidParameter(
                                "structure constants violate the Jacobi identity",
                            ));
                        }
                    }
                }
            }
        }
        if let Some(basis) = &spec.basis {
            if basis.len() != dim {
                return Err(CoreError::DimensionMismatch { expected: dim, got: basis.len() });
            }
            for a in 0..dim {
                for b in 0..dim {
                    let lhs = basis[a].mat_mul(&basis[b]).sub(&basis[b].mat_mul(&basis[a]));
                    let mut rhs = DenseMatrix::zeros(lhs.rows(), lhs.cols());
                    for c in 0..dim {
                        rhs = rhs.add(&basis[c].scale(spec.c(a, b, c)));
                    }
                    if lhs.sub(&rhs).norm_inf() > ALGEBRA_TOL {
                        return Err(CoreError::InvalidParameter(
                            "basis matrices do not realize the structure constants",
                        ));
                    }
                }
            }
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Structure constant `C^c_{ab}`.
    #[inline]
    pub fn c(&self, a: usize, b: usize, c: usize) -> f64 {
        self.structure[(a * self.dim + b) * self.dim + c]
    }

    pub fn basis_matrices(&self) -> Option<&[DenseMatrix]> {
        self.basis.as_deref()
    }

    /// The algebra element `xi^a E_a` in the matrix representation.
    pub fn represent(&self, xi: &[f64]) -> Result<DenseMatrix> {
        let basis = self
            .basis
            .as_ref()
            .ok_or(CoreError::InvalidParameter("basis matrices required"))?;
        if basis.is_empty() {
            return Ok(DenseMatrix::zeros(0, 0));
        }
        let mut out = DenseMatrix::zeros(basis[0].rows(), basis[0].cols());
        for (coef, e) in xi.iter().zip(basis) {
            out = out.add(&e.scale(*coef));
        }
        Ok(out)
    }

    /// The matrix of `ad_xi` in the basis: `(ad_xi)^c_b = C^c_{ab} xi^a`.
    pub fn ad_matrix(&self, xi: &[f64]) -> DenseMatrix {
        let d = self.dim;
        let mut out = DenseMatrix::zeros(d, d);
        for c in 0..d {
            for b in 0..d {
                let mut acc = 0.0;
                for a in 0..d {
                    acc += self.c(a, b, c) * xi[a];
                }
                out.set(c, b, acc);
            }
        }
        out
    }
}

/// The Lie bracket in coordinates: `([xi, eta])^c = C^c_{ab} xi^a eta^b`.
pub fn bracket(spec: &LieAlgebraSpec, xi: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
    let d = spec.dim();
    if xi.len() != d {
        return Err(CoreError::DimensionMismatch { expected: d, got: xi.len() });
    }
    if eta.len() != d {
        return Err(CoreError::DimensionMismatch { expected: d, got: eta.len() });
    }
    let mut out = vec![0.0; d];
    for a in 0..d {
        if xi[a] == 0.0 {
            continue;
        }
        for b in 0..d {
            if eta[b] == 0.0 {
                continue;
            }
            for c in 0..d {
                out[c] += spec.c(a, b, c) * xi[a] * eta[b];
            }
        }
    }
    Ok(out)
}

/// A group element in a fixed chart around the identity.
///
/// Coordinates of the identity are all zero; the matrix is the image in the
/// chosen representation.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub coords: Vec<f64>,
    pub matrix: DenseMatrix,
}

type CoordsToMatrix = Box<dyn Fn(&[f64]) -> Result<DenseMatrix> + Send + Sync>;
type MatrixToCoords = Box<dyn Fn(&DenseMatrix) -> Result<Vec<f64>> + Send + Sync>;

/// A matrix Lie group: an algebra plus a coordinate chart around the
/// identity. Chart maps are supplied by each scenario.
pub struct LieGroup {
    pub algebra: LieAlgebraSpec,
    coords_to_matrix: CoordsToMatrix,
    matrix_to_coords: MatrixToCoords,
}

impl LieGroup {
    pub fn new(
        algebra: LieAlgebraSpec,
        coords_to_matrix: CoordsToMatrix,
        matrix_to_coords: MatrixToCoords,
    ) -> Self {
        Self { algebra, coords_to_matrix, matrix_to_coords }
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn identity(&self) -> Result<GroupElement> {
        self.element_from_coords(&vec![0.0; self.dim()])
    }

    pub fn element_from_coords(&self, coords: &[f64]) -> Result<GroupElement> {
        let matrix = (self.coords_to_matrix)(coords)?;
        Ok(GroupElement { coords: coords.to_vec(), matrix })
    }

    pub fn element_from_matrix(&self, matrix: DenseMatrix) -> Result<GroupElement> {
        let coords = (self.matrix_to_coords)(&matrix)?;
        Ok(GroupElement { coords, matrix })
    }

    /// The group exponential of `xi^a E_a`, with coordinates recovered
    /// through the chart map.
    pub fn group_exp(&self, xi: &[f64]) -> Result<GroupElement> {
        let rep = self.algebra.represent(xi)?;
        self.element_from_matrix(mat_exp(&rep))
    }

    pub fn left_multiply(&self, g1: &GroupElement, g2: &GroupElement) -> Result<GroupElement> {
        self.element_from_matrix(g1.matrix.mat_mul(&g2.matrix))
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.element_from_matrix(g.matrix.inverse()?)
    }
}

/// The adjoint matrix `A^b_a(g)` recovered from the representation:
/// `g E_a g^-1 = A^b_a E_b`, coefficients solved against the basis Gram
/// matrix. Fails with [`CoreError::BasisNotClosed`] when the conjugated
/// element leaves the span of the basis (residual above `1e-9`).
pub fn adjoint_from_matrices(spec: &LieAlgebraSpec, g: &GroupElement) -> Result<DenseMatrix> {
    let basis = spec
        .basis_matrices()
        .ok_or(CoreError::InvalidParameter("basis matrices required"))?;
    let d = spec.dim();
    let g_inv = g.matrix.inverse()?;

    let mut gram = DenseMatrix::zeros(d, d);
    for b in 0..d {
        for c in 0..d {
            let dot = basis[b]
                .data()
                .iter()
                .zip(basis[c].data())
                .map(|(x, y)| x * y)
                .sum::<f64>();
            gram.set(b, c, dot);
        }
    }

    let mut out = DenseMatrix::zeros(d, d);
    for a in 0..d {
        let conj = g.matrix.mat_mul(&basis[a]).mat_mul(&g_inv);
        let rhs: Vec<f64> = (0..d)
            .map(|b| {
                basis[b]
                    .data()
                    .iter()
                    .zip(conj.data())
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
            })
            .collect();
        let coeffs = gram.lu_solve(&rhs)?;
        let mut recon = DenseMatrix::zeros(conj.rows(), conj.cols());
        for (b, coef) in coeffs.iter().enumerate() {
            recon = recon.add(&basis[b].scale(*coef));
        }
        let residual = recon.sub(&conj).norm_inf();
        if residual > 1e-9 {
            return Err(CoreError::BasisNotClosed { residual });
        }
        for (b, coef) in coeffs.iter().enumerate() {
            out.set(b, a, *coef);
        }
    }
    Ok(out)
}

/// Number of terms for the dexp-series on exponential charts. With chart
/// radius below ~2 the truncation error is under 1e-13.
const DEXP_SERIES_TERMS: usize = 20;

/// `ad_xi` over dual entries, for exponential-chart frame fields.
pub fn ad_matrix_dual(spec: &LieAlgebraSpec, xi: &[Dual2]) -> Vec<Vec<Dual2>> {
    let d = spec.dim();
    let m = xi.first().map_or(0, |d| d.seeds());
    let mut out = vec![vec![Dual2::constant(0.0, m); d]; d];
    for c in 0..d {
        for b in 0..d {
            let mut acc = Dual2::constant(0.0, m);
            for a in 0..d {
                let coef = spec.c(a, b, c);
                if coef != 0.0 {
                    acc = &acc + &(&xi[a] * coef);
                }
            }
            out[c][b] = acc;
        }
    }
    out
}

fn dual_identity(d: usize, m: usize) -> Vec<Vec<Dual2>> {
    let mut out = vec![vec![Dual2::constant(0.0, m); d]; d];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = Dual2::constant(1.0, m);
    }
    out
}

/// `phi(ad_y) = sum_k ad_y^k / (k+1)!`, the right-trivialized dexp.
fn dexp_series(spec: &LieAlgebraSpec, y: &[Dual2], negate: bool) -> Vec<Vec<Dual2>> {
    let d = spec.dim();
    let m = y.first().map_or(0, |d| d.seeds());
    let mut ad = ad_matrix_dual(spec, y);
    if negate {
        for row in ad.iter_mut() {
            for entry in row.iter_mut() {
                *entry = -&*entry;
            }
        }
    }
    let mut sum = dual_identity(d, m);
    let mut term = dual_identity(d, m);
    let mut factorial = 1.0;
    for k in 1..=DEXP_SERIES_TERMS {
        term = crate::numerics::dual_mat_mul(&term, &ad);
        factorial *= (k + 1) as f64;
        for i in 0..d {
            for j in 0..d {
                sum[i][j] = &sum[i][j] + &(&term[i][j] * (1.0 / factorial));
            }
        }
    }
    sum
}

fn dual_mat_inverse(a: &[Vec<Dual2>]) -> Result<Vec<Vec<Dual2>>> {
    let d = a.len();
    let m = a.first().and_then(|r| r.first()).map_or(0, |d| d.seeds());
    let mut cols = Vec::with_capacity(d);
    for j in 0..d {
        let mut e = vec![Dual2::constant(0.0, m); d];
        e[j] = Dual2::constant(1.0, m);
        cols.push(dual_solve(a, &e)?);
    }
    let mut out = vec![vec![Dual2::constant(0.0, m); d]; d];
    for i in 0..d {
        for (j, col) in cols.iter().enumerate() {
            out[i][j] = col[i].clone();
        }
    }
    Ok(out)
}

/// Fundamental-field matrix `K^b_a(y)` in an exponential chart.
///
/// The fundamental fields of the left action generate left translations, so
/// in exponential coordinates `K(y) = phi(ad_y)^-1` with
/// `phi(x) = (e^x - 1)/x`.
pub fn exp_chart_k_matrix(spec: &LieAlgebraSpec, y: &[Dual2]) -> Result<Vec<Vec<Dual2>>> {
    dual_mat_inverse(&dexp_series(spec, y, false))
}

/// Adjoint matrix in an exponential chart: `A(exp(y)) = exp(ad_y)`.
pub fn exp_chart_adjoint(spec: &LieAlgebraSpec, y: &[Dual2]) -> Vec<Vec<Dual2>> {
    let d = spec.dim();
    let m = y.first().map_or(0, |d| d.seeds());
    let ad = ad_matrix_dual(spec, y);
    let mut sum = dual_identity(d, m);
    let mut term = dual_identity(d, m);
    let mut factorial = 1.0;
    for k in 1..=DEXP_SERIES_TERMS {
        term = crate::numerics::dual_mat_mul(&term, &ad);
        factorial *= k as f64;
        for i in 0..d {
            for j in 0..d {
                sum[i][j] = &sum[i][j] + &(&term[i][j] * (1.0 / factorial));
            }
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::groups::{affine_group, so3_group, translation_group};

    #[test]
    fn bracket_antisymmetry_on_self() {
        let g = so3_group().unwrap();
        let xi = [0.3, -0.7, 1.1];
        let b = bracket(&g.algebra, &xi, &xi).unwrap();
        assert!(b.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn affine_bracket_of_basis() {
        // [E1, E2] = E2 for the affine matrices; the structure constant
        // consistent with the representation is C^2_12 = +1.
        let g = affine_group().unwrap();
        let b = bracket(&g.algebra, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(b, vec![0.0, 1.0]);
    }

    #[test]
    fn abelian_bracket_vanishes() {
        let g = translation_group(3).unwrap();
        let b = bracket(&g.algebra, &[1.0, 2.0, 3.0], &[-1.0, 0.5, 2.0]).unwrap();
        assert!(b.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = so3_group().unwrap();
        assert!(matches!(
            bracket(&g.algebra, &[1.0, 0.0], &[0.0, 1.0, 0.0]),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn adjoint_at_identity() {
        let g = affine_group().unwrap();
        let e = g.identity().unwrap();
        let a = adjoint_from_matrices(&g.algebra, &e).unwrap();
        assert_eq!(a, DenseMatrix::identity(2));
    }

    #[test]
    fn affine_adjoint_closed_form() {
        let g = affine_group().unwrap();
        let (theta, phi) = (0.7, -1.3);
        let el = g.element_from_coords(&[theta, phi]).unwrap();
        let a = adjoint_from_matrices(&g.algebra, &el).unwrap();
        assert!((a.get(0, 0) - 1.0).abs() < 1e-12);
        assert!(a.get(0, 1).abs() < 1e-12);
        assert!((a.get(1, 0) + phi).abs() < 1e-12);
        assert!((a.get(1, 1) - theta.exp()).abs() < 1e-12);
    }

    #[test]
    fn abelian_adjoint_is_identity() {
        let g = translation_group(2).unwrap();
        let el = g.element_from_coords(&[0.4, -2.0]).unwrap();
        let a = adjoint_from_matrices(&g.algebra, &el).unwrap();
        assert!(a.sub(&DenseMatrix::identity(2)).norm_inf() < 1e-14);
    }

    #[test]
    fn adjoint_is_homomorphism() {
        let g = affine_group().unwrap();
        let mut rng = crate::rng::SplitMix64::new(11);
        for _ in 0..50 {
            let g1 = g
                .element_from_coords(&[rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)])
                .unwrap();
            let g2 = g
                .element_from_coords(&[rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)])
                .unwrap();
            let g12 = g.left_multiply(&g1, &g2).unwrap();
            let lhs = adjoint_from_matrices(&g.algebra, &g12).unwrap();
            let rhs = adjoint_from_matrices(&g.algebra, &g1)
                .unwrap()
                .mat_mul(&adjoint_from_matrices(&g.algebra, &g2).unwrap());
            assert!(lhs.sub(&rhs).norm_inf() < 1e-9);
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let g = affine_group().unwrap();
        let e = g.group_exp(&[0.0, 0.0]).unwrap();
        assert!(e.coords.iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn affine_exp_diagonal_generator() {
        let g = affine_group().unwrap();
        let theta = 0.8;
        let el = g.group_exp(&[theta, 0.0]).unwrap();
        assert!((el.coords[0] - theta).abs() < 1e-12);
        assert!(el.coords[1].abs() < 1e-12);
    }

    #[test]
    fn affine_exp_nilpotent_generator() {
        let g = affine_group().unwrap();
        let phi = -0.6;
        let el = g.group_exp(&[0.0, phi]).unwrap();
        assert!(el.coords[0].abs() < 1e-12);
        assert!((el.coords[1] - phi).abs() < 1e-12);
    }

    #[test]
    fn exp_times_exp_of_negation_is_identity() {
        for xi in [[0.5, -0.3], [1.2, 0.8], [-0.9, 0.1]] {
            let g = affine_group().unwrap();
            let a = g.group_exp(&xi).unwrap();
            let b = g.group_exp(&[-xi[0], -xi[1]]).unwrap();
            let prod = g.left_multiply(&a, &b).unwrap();
            assert!(prod.matrix.sub(&DenseMatrix::identity(2)).norm_inf() < 1e-10);
        }
    }

    #[test]
    fn multiply_by_identity() {
        let g = affine_group().unwrap();
        let el = g.element_from_coords(&[0.3, 1.7]).unwrap();
        let prod = g.left_multiply(&el, &g.identity().unwrap()).unwrap();
        assert!((prod.coords[0] - 0.3).abs() < 1e-14);
        assert!((prod.coords[1] - 1.7).abs() < 1e-14);
    }

    #[test]
    fn affine_composition_rule() {
        // (1, 2) * (0, 3) = (1, 2 + 3 e)
        let g = affine_group().unwrap();
        let g1 = g.element_from_coords(&[1.0, 2.0]).unwrap();
        let g2 = g.element_from_coords(&[0.0, 3.0]).unwrap();
        let prod = g.left_multiply(&g1, &g2).unwrap();
        assert!((prod.coords[0] - 1.0).abs() < 1e-14);
        assert!((prod.coords[1] - (2.0 + 3.0 * 1.0_f64.exp())).abs() < 1e-13);
    }

    #[test]
    fn affine_inverse_formula() {
        // (theta, phi) * (-theta, -exp(-theta) phi) = identity
        let g = affine_group().unwrap();
        let (theta, phi) = (0.9, -2.1);
        let g1 = g.element_from_coords(&[theta, phi]).unwrap();
        let g2 = g
            .element_from_coords(&[-theta, -(-theta).exp() * phi])
            .unwrap();
        let prod = g.left_multiply(&g1, &g2).unwrap();
        assert!(prod.coords[0].abs() < 1e-13);
        assert!(prod.coords[1].abs() < 1e-13);
    }

    #[test]
    fn exp_chart_series_at_origin() {
        let g = so3_group().unwrap();
        let y = Dual2::constants(&[0.0, 0.0, 0.0], 0);
        let k = exp_chart_k_matrix(&g.algebra, &y).unwrap();
        let a = exp_chart_adjoint(&g.algebra, &y);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((k[i][j].value() - expect).abs() < 1e-15);
                assert!((a[i][j].value() - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exp_chart_adjoint_matches_conjugation() {
        let g = so3_group().unwrap();
        let y = [0.3, -0.5, 0.7];
        let el = g.group_exp(&y).unwrap();
        let by_conj = adjoint_from_matrices(&g.algebra, &el).unwrap();
        let by_series = exp_chart_adjoint(&g.algebra, &Dual2::constants(&y, 0));
        for i in 0..3 {
            for j in 0..3 {
                assert!((by_series[i][j].value() - by_conj.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_violation_is_rejected() {
        // d = 3 with only C^3_12 = 1 antisymmetrized: [[E1,E2],E3] cyclic
        // sums fine, but make C^1_23 = 1 too which breaks Jacobi.
        let d = 3;
        let mut c = vec![0.0; d * d * d];
        let mut set = |a: usize, b: usize, cc: usize, v: f64| {
            c[(a * d + b) * d + cc] = v;
            c[(b * d + a) * d + cc] = -v;
        };
        set(0, 1, 2, 1.0);
        set(1, 2, 1, 1.0);
        assert!(matches!(
            LieAlgebraSpec::new(d, c, None),
            Err(CoreError::InvalidParameter(_))
        ));
    }
}
