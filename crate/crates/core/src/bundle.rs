//! The principal bundle `Q -> Q/G` in a single trivializing chart.
//!
//! Coordinates split as `(q^i, q^a)`: base coordinates on the quotient and
//! fiber coordinates on the group. Three frames matter:
//!
//! * `X_i = d/dq^i - gamma^b_i Ehat_b` - horizontal lifts of the base
//!   coordinate fields through the principal connection `gamma`,
//! * `Etilde_a = K^b_a d/dq^b` - fundamental vector fields of the action,
//! * `Ehat_a = A^b_a(g) Etilde_b` - the invariant vertical frame, related to
//!   the fundamental one by the adjoint matrix.
//!
//! Frames are represented by their coordinate components evaluated pointwise;
//! brackets and the `Upsilon` coefficients are obtained by dual-number
//! differentiation of those components, which turns the frame bracket table
//! into a checkable property instead of an assumption.
//!
//! The connection coefficients `gamma` take only base coordinates by
//! construction, so the invariance requirement `d gamma / d q^a = 0` is
//! enforced by the API itself.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::lie::{GroupElement, LieGroup};
use crate::numerics::{dual_mat_vec, dual_solve, DenseMatrix, Dual2};

/// A matrix-valued function of chart coordinates, evaluated on dual numbers
/// so that every derived quantity (curvature, brackets, lifts) can be
/// differentiated exactly.
pub type DualMatrixFn = Box<dyn Fn(&[Dual2]) -> Result<Vec<Vec<Dual2>>> + Send + Sync>;

/// Fiber part of the group action in coordinates: `(g, q^a) -> (g * q^a)`.
pub type FiberActionFn = Box<dyn Fn(&GroupElement, &[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// Dual-number variant of the fiber action, available when the scenario has
/// a closed-form action (used to cross-check the tangent-lift theorem).
pub type FiberActionDualFn =
    Box<dyn Fn(&GroupElement, &[Dual2]) -> Result<Vec<Dual2>> + Send + Sync>;

/// How `Upsilon^b_{ia} = X_i(A^c_a) Abar^b_c` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsilonMode {
    /// Differentiate the adjoint along the frame fields (the general path).
    General,
    /// Use the closed form `Upsilon^b_{ia} = gamma^c_i C^b_{ac}`, valid for
    /// invariant connection coefficients in a trivializing chart.
    GammaC,
}

/// Chart data for the bundle: dimensions, the symmetry group, connection
/// coefficients, frame matrices, and the group action on the fiber.
pub struct BundleChart {
    base_dim: usize,
    fiber_dim: usize,
    group: Arc<LieGroup>,
    /// `gamma[a][i]`, function of the base coordinates only.
    gamma: DualMatrixFn,
    /// `K[b][a]` with `Etilde_a = K^b_a d/dq^b`, function of fiber coords.
    fundamental_k: DualMatrixFn,
    /// Adjoint matrix `A[b][a]` as a function of fiber coordinates.
    adjoint: DualMatrixFn,
    act_fiber: FiberActionFn,
    act_fiber_dual: Option<FiberActionDualFn>,
    upsilon_mode: UpsilonMode,
}

/// A point of `TQ x R` in the adapted representation: configuration split
/// into base and fiber parts, quasi-velocities `(v^i, w^a)` against the
/// invariant frame `{X_i, Ehat_a}`, and the action variable `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub q_base: Vec<f64>,
    pub q_fiber: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub s: f64,
}

/// A point of `(TQ/G) x R`: the fiber coordinate is forgotten.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub q_base: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub s: f64,
}

impl FullState {
    /// Drops the fiber coordinate: `(q^i, q^a, v, w, s) -> (q^i, v, w, s)`.
    pub fn project(&self) -> ReducedState {
        ReducedState {
            q_base: self.q_base.clone(),
            v: self.v.clone(),
            w: self.w.clone(),
            s: self.s,
        }
    }
}

impl BundleChart {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        base_dim: usize,
        fiber_dim: usize,
        group: Arc<LieGroup>,
        gamma: DualMatrixFn,
        fundamental_k: DualMatrixFn,
        adjoint: DualMatrixFn,
        act_fiber: FiberActionFn,
        act_fiber_dual: Option<FiberActionDualFn>,
        upsilon_mode: UpsilonMode,
    ) -> Self {
        Self {
            base_dim,
            fiber_dim,
            group,
            gamma,
            fundamental_k,
            adjoint,
            act_fiber,
            act_fiber_dual,
            upsilon_mode,
        }
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    /// Total configuration dimension `n = base + fiber`.
    pub fn dim(&self) -> usize {
        self.base_dim + self.fiber_dim
    }

    pub fn group(&self) -> &Arc<LieGroup> {
        &self.group
    }

    pub fn upsilon_mode(&self) -> UpsilonMode {
        self.upsilon_mode
    }

    pub fn has_dual_action(&self) -> bool {
        self.act_fiber_dual.is_some()
    }

    pub fn fiber_element(&self, q_fiber: &[f64]) -> Result<GroupElement> {
        self.group.element_from_coords(q_fiber)
    }

    pub fn gamma_dual(&self, q_base: &[Dual2]) -> Result<Vec<Vec<Dual2>>> {
        (self.gamma)(q_base)
    }

    pub fn k_dual(&self, q_fiber: &[Dual2]) -> Result<Vec<Vec<Dual2>>> {
        (self.fundamental_k)(q_fiber)
    }

    pub fn adjoint_dual(&self, q_fiber: &[Dual2]) -> Result<Vec<Vec<Dual2>>> {
        (self.adjoint)(q_fiber)
    }

    pub fn gamma_at(&self, q_base: &[f64]) -> Result<DenseMatrix> {
        values_of(&(self.gamma)(&Dual2::constants(q_base, 0))?, self.fiber_dim, self.base_dim)
    }

    pub fn k_at(&self, q_fiber: &[f64]) -> Result<DenseMatrix> {
        values_of(
            &(self.fundamental_k)(&Dual2::constants(q_fiber, 0))?,
            self.fiber_dim,
            self.fiber_dim,
        )
    }

    /// Adjoint matrix `A^b_a(g)` at a group element, through the chart.
    pub fn adjoint_at(&self, g: &GroupElement) -> Result<DenseMatrix> {
        values_of(
            &(self.adjoint)(&Dual2::constants(&g.coords, 0))?,
            self.fiber_dim,
            self.fiber_dim,
        )
    }

    /// Group action on the fiber coordinate, `q^a -> (g * q)^a`.
    pub fn act_on_fiber(&self, g: &GroupElement, q_fiber: &[f64]) -> Result<Vec<f64>> {
        (self.act_fiber)(g, q_fiber)
    }

    pub fn act_on_fiber_dual(&self, g: &GroupElement, q_fiber: &[Dual2]) -> Result<Vec<Dual2>> {
        match &self.act_fiber_dual {
            Some(f) => f(g, q_fiber),
            None => Err(CoreError::InvalidParameter(
                "scenario does not register a dual-number fiber action",
            )),
        }
    }

    /// Coordinate components of the frames `{X_i}`, `{Ehat_a}`, `{Etilde_a}`
    /// over dual coordinates `(q^i, q^a)`.
    ///
    /// Each returned matrix is `n x k` with the column the frame index:
    /// `X_i`'s fiber components are `-(K A gamma)^c_i`, `Ehat`'s are
    /// `(K A)^c_a`, `Etilde`'s are `K^c_a`.
    pub fn frames_dual(&self, q: &[Dual2]) -> Result<FrameComponents> {
        let (nb, d, n) = (self.base_dim, self.fiber_dim, self.dim());
        let m = q.first().map_or(0, |x| x.seeds());
        let qb = &q[..nb];
        let qf = &q[nb..];

        let gamma = (self.gamma)(qb)?;
        let k = (self.fundamental_k)(qf)?;
        let a = (self.adjoint)(qf)?;
        let ka = crate::numerics::dual_mat_mul(&k, &a);

        let zero = Dual2::constant(0.0, m);
        let mut xi = vec![vec![zero.clone(); nb]; n];
        let mut ehat = vec![vec![zero.clone(); d]; n];
        let mut etilde = vec![vec![zero; d]; n];

        for i in 0..nb {
            xi[i][i] = Dual2::constant(1.0, m);
        }
        for c in 0..d {
            for i in 0..nb {
                let mut acc = Dual2::constant(0.0, m);
                for b in 0..d {
                    acc = &acc + &(&ka[c][b] * &gamma[b][i]);
                }
                xi[nb + c][i] = -&acc;
            }
            for a_idx in 0..d {
                ehat[nb + c][a_idx] = ka[c][a_idx].clone();
                etilde[nb + c][a_idx] = k[c][a_idx].clone();
            }
        }
        Ok(FrameComponents { xi, ehat, etilde })
    }

    /// Plain-value frame component matrices `(X_i, Ehat_a)` as `n x nb` and
    /// `n x d` column matrices.
    pub fn frame_matrices(&self, q: &[f64]) -> Result<(DenseMatrix, DenseMatrix)> {
        let frames = self.frames_dual(&Dual2::constants(q, 0))?;
        Ok((
            values_of(&frames.xi, self.dim(), self.base_dim)?,
            values_of(&frames.ehat, self.dim(), self.fiber_dim)?,
        ))
    }

    /// Fundamental frame components `Etilde_a` as an `n x d` column matrix.
    pub fn etilde_matrix(&self, q: &[f64]) -> Result<DenseMatrix> {
        let frames = self.frames_dual(&Dual2::constants(q, 0))?;
        values_of(&frames.etilde, self.dim(), self.fiber_dim)
    }

    /// The full frame matrix `[X_i | Ehat_a]` (n x n).
    pub fn frame_full(&self, q: &[f64]) -> Result<DenseMatrix> {
        let (xi, ehat) = self.frame_matrices(q)?;
        let n = self.dim();
        let mut f = DenseMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..self.base_dim {
                f.set(r, c, xi.get(r, c));
            }
            for c in 0..self.fiber_dim {
                f.set(r, self.base_dim + c, ehat.get(r, c));
            }
        }
        Ok(f)
    }

    /// Curvature of the principal connection,
    /// `K^a_{ij} = d gamma^a_j / dq^i - d gamma^a_i / dq^j
    ///  + gamma^b_i gamma^c_j C^a_{bc}`,
    /// returned flat as `[(a * nb + i) * nb + j]`. Antisymmetric in `(i, j)`
    /// by construction.
    pub fn curvature(&self, q_base: &[f64]) -> Result<Vec<f64>> {
        let (nb, d) = (self.base_dim, self.fiber_dim);
        let qb = Dual2::seed_all(q_base);
        let gamma = (self.gamma)(&qb)?;
        let spec = &self.group.algebra;

        let mut out = vec![0.0; d * nb * nb];
        for a in 0..d {
            for i in 0..nb {
                for j in 0..nb {
                    let mut val = gamma[a][j].gradient()[i] - gamma[a][i].gradient()[j];
                    for b in 0..d {
                        for c in 0..d {
                            let cc = spec.c(b, c, a);
                            if cc != 0.0 {
                                val += gamma[b][i].value() * gamma[c][j].value() * cc;
                            }
                        }
                    }
                    out[(a * nb + i) * nb + j] = val;
                }
            }
        }
        Ok(out)
    }

    /// The coefficients `Upsilon^b_{ia}` of `[X_i, Ehat_a] = Upsilon^b_{ia}
    /// Ehat_b`, flat as `[(b * nb + i) * d + a]`.
    pub fn upsilon(&self, q: &[f64]) -> Result<Vec<f64>> {
        match self.upsilon_mode {
            UpsilonMode::GammaC => self.upsilon_gamma_c(&q[..self.base_dim]),
            UpsilonMode::General => self.upsilon_general(q),
        }
    }

    /// Closed form `Upsilon^b_{ia} = gamma^c_i C^b_{ac}`.
    pub fn upsilon_gamma_c(&self, q_base: &[f64]) -> Result<Vec<f64>> {
        let (nb, d) = (self.base_dim, self.fiber_dim);
        let gamma = self.gamma_at(q_base)?;
        let spec = &self.group.algebra;
        let mut out = vec![0.0; d * nb * d];
        for b in 0..d {
            for i in 0..nb {
                for a in 0..d {
                    let mut acc = 0.0;
                    for c in 0..d {
                        acc += gamma.get(c, i) * spec.c(a, c, b);
                    }
                    out[(b * nb + i) * d + a] = acc;
                }
            }
        }
        Ok(out)
    }

    /// General path: `Upsilon^b_{ia} = X_i(A^c_a) Abar^b_c`, the derivative
    /// of the adjoint taken along the frame field by a directional dual seed.
    pub fn upsilon_general(&self, q: &[f64]) -> Result<Vec<f64>> {
        let (nb, d) = (self.base_dim, self.fiber_dim);
        let (xi, _) = self.frame_matrices(q)?;
        let a_inv = self.adjoint_matrix_at(&q[nb..])?.inverse()?;

        let mut out = vec![0.0; d * nb * d];
        for i in 0..nb {
            // Fiber components of X_i drive the directional derivative; the
            // adjoint depends on fiber coordinates only.
            let qf_dir: Vec<Dual2> = (0..d)
                .map(|c| Dual2::directional(q[nb + c], xi.get(nb + c, i)))
                .collect();
            let a_dual = (self.adjoint)(&qf_dir)?;
            for b in 0..d {
                for a_idx in 0..d {
                    let mut acc = 0.0;
                    for c in 0..d {
                        acc += a_dual[c][a_idx].gradient()[0] * a_inv.get(b, c);
                    }
                    out[(b * nb + i) * d + a_idx] = acc;
                }
            }
        }
        Ok(out)
    }

    fn adjoint_matrix_at(&self, q_fiber: &[f64]) -> Result<DenseMatrix> {
        values_of(
            &(self.adjoint)(&Dual2::constants(q_fiber, 0))?,
            self.fiber_dim,
            self.fiber_dim,
        )
    }

    /// Decomposes natural velocities in the invariant frame:
    /// `u = v^i X_i + w^a Ehat_a`.
    pub fn to_quasi(&self, q: &[f64], u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if u.len() != self.dim() {
            return Err(CoreError::DimensionMismatch { expected: self.dim(), got: u.len() });
        }
        let f = self.frame_full(q)?;
        let sol = f.lu_solve(u)?;
        let (v, w) = sol.split_at(self.base_dim);
        Ok((v.to_vec(), w.to_vec()))
    }

    /// Reassembles natural velocities from quasi-velocities.
    pub fn from_quasi(&self, q: &[f64], v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let f = self.frame_full(q)?;
        let mut coeffs = Vec::with_capacity(self.dim());
        coeffs.extend_from_slice(v);
        coeffs.extend_from_slice(w);
        Ok(f.mat_vec(&coeffs))
    }

    /// `from_quasi` over dual numbers, used when a reduced Lagrangian is
    /// evaluated through the frame.
    pub fn from_quasi_dual(&self, q: &[Dual2], v: &[Dual2], w: &[Dual2]) -> Result<Vec<Dual2>> {
        let frames = self.frames_dual(q)?;
        let mut coeffs = Vec::with_capacity(self.dim());
        coeffs.extend_from_slice(v);
        coeffs.extend_from_slice(w);
        let mut f = frames.xi;
        for (row, ehat_row) in f.iter_mut().zip(frames.ehat) {
            row.extend(ehat_row);
        }
        Ok(dual_mat_vec(&f, &coeffs))
    }

    /// `to_quasi` over dual numbers.
    pub fn to_quasi_dual(&self, q: &[Dual2], u: &[Dual2]) -> Result<(Vec<Dual2>, Vec<Dual2>)> {
        let frames = self.frames_dual(q)?;
        let mut f = frames.xi;
        for (row, ehat_row) in f.iter_mut().zip(frames.ehat) {
            row.extend(ehat_row);
        }
        let sol = dual_solve(&f, u)?;
        let (v, w) = sol.split_at(self.base_dim);
        Ok((v.to_vec(), w.to_vec()))
    }

    /// Converts an adapted state to natural coordinates `(q, u, s)`.
    pub fn to_natural(&self, state: &FullState) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut q = state.q_base.clone();
        q.extend_from_slice(&state.q_fiber);
        let u = self.from_quasi(&q, &state.v, &state.w)?;
        Ok((q, u, state.s))
    }

    /// Builds an adapted state from natural coordinates.
    pub fn from_natural(&self, q: &[f64], u: &[f64], s: f64) -> Result<FullState> {
        if q.len() != self.dim() {
            return Err(CoreError::DimensionMismatch { expected: self.dim(), got: q.len() });
        }
        let (v, w) = self.to_quasi(q, u)?;
        Ok(FullState {
            q_base: q[..self.base_dim].to_vec(),
            q_fiber: q[self.base_dim..].to_vec(),
            v,
            w,
            s,
        })
    }

    /// Tangent-lifted action on an adapted state. The quasi-velocities are
    /// invariant functions of the lifted action (the frames `X_i`, `Ehat_a`
    /// are invariant), so only the fiber coordinate moves.
    pub fn act_on_state(&self, g: &GroupElement, state: &FullState) -> Result<FullState> {
        let q_fiber = self.act_on_fiber(g, &state.q_fiber)?;
        Ok(FullState { q_fiber, ..state.clone() })
    }

    /// Cross-checks the invariance of quasi-velocities against the actual
    /// pushforward of natural velocities through the action (computed by
    /// dual numbers). Returns the max deviation between the two routes.
    pub fn tangent_action_residual(&self, g: &GroupElement, state: &FullState) -> Result<f64> {
        let (q, u, _s) = self.to_natural(state)?;
        let nb = self.base_dim;

        // Pushforward: base coordinates are fixed by the action, the fiber
        // moves by act_fiber; differentiate along u.
        let qf_dir: Vec<Dual2> = q[nb..]
            .iter()
            .zip(&u[nb..])
            .map(|(&x, &dx)| Dual2::directional(x, dx))
            .collect();
        let moved = self.act_on_fiber_dual(g, &qf_dir)?;
        let mut q_new = q[..nb].to_vec();
        let mut u_new = u[..nb].to_vec();
        // The dual action sees only fiber directions; base velocity passes
        // through unchanged. Fiber velocity picks up the full differential.
        let mut q_fiber_new = Vec::with_capacity(self.fiber_dim);
        let mut u_fiber_new = Vec::with_capacity(self.fiber_dim);
        for m in &moved {
            q_fiber_new.push(m.value());
            u_fiber_new.push(m.gradient()[0]);
        }
        q_new.extend_from_slice(&q_fiber_new);
        u_new.extend_from_slice(&u_fiber_new);
        let (v_push, w_push) = self.to_quasi(&q_new, &u_new)?;

        let mut res = 0.0_f64;
        for (a, b) in v_push.iter().zip(&state.v) {
            res = res.max((a - b).abs());
        }
        for (a, b) in w_push.iter().zip(&state.w) {
            res = res.max((a - b).abs());
        }
        Ok(res)
    }

    /// Numerically evaluates all six bracket relations of the invariant
    /// frame table and returns the max residual per relation:
    ///
    /// 1. `[Etilde_a, Etilde_b] + C^c_{ab} Etilde_c`
    /// 2. `[Ehat_a, Ehat_b] - C^c_{ab} Ehat_c`
    /// 3. `[X_i, Etilde_a]`
    /// 4. `[X_i, Ehat_a] - Upsilon^b_{ia} Ehat_b`
    /// 5. `[X_i, X_j] + K^a_{ij} Ehat_a`
    /// 6. `[Etilde_a, Ehat_b]`
    pub fn bracket_table_check(&self, q: &[f64]) -> Result<[f64; 6]> {
        let (nb, d, n) = (self.base_dim, self.fiber_dim, self.dim());
        let spec = &self.group.algebra;
        let frames = self.frames_dual(&Dual2::seed_all(q))?;

        let field = |cols: &Vec<Vec<Dual2>>, idx: usize| -> (Vec<f64>, Vec<Vec<f64>>) {
            let vals: Vec<f64> = (0..n).map(|r| cols[r][idx].value()).collect();
            let jac: Vec<Vec<f64>> =
                (0..n).map(|r| cols[r][idx].gradient().to_vec()).collect();
            (vals, jac)
        };
        let lie_bracket = |u: &(Vec<f64>, Vec<Vec<f64>>), v: &(Vec<f64>, Vec<Vec<f64>>)| {
            let mut out = vec![0.0; n];
            for alpha in 0..n {
                for beta in 0..n {
                    out[alpha] += u.0[beta] * v.1[alpha][beta] - v.0[beta] * u.1[alpha][beta];
                }
            }
            out
        };
        let max_abs = |x: &[f64]| x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

        let xi: Vec<_> = (0..nb).map(|i| field(&frames.xi, i)).collect();
        let ehat: Vec<_> = (0..d).map(|a| field(&frames.ehat, a)).collect();
        let etilde: Vec<_> = (0..d).map(|a| field(&frames.etilde, a)).collect();

        let curvature = self.curvature(&q[..nb])?;
        let upsilon = self.upsilon(q)?;

        let mut res = [0.0_f64; 6];
        for a in 0..d {
            for b in 0..d {
                // (1) [Etilde_a, Etilde_b] = -C^c_ab Etilde_c
                let mut r = lie_bracket(&etilde[a], &etilde[b]);
                for c in 0..d {
                    let cc = spec.c(a, b, c);
                    if cc != 0.0 {
                        for alpha in 0..n {
                            r[alpha] += cc * etilde[c].0[alpha];
                        }
                    }
                }
                res[0] = res[0].max(max_abs(&r));

                // (2) [Ehat_a, Ehat_b] = C^c_ab Ehat_c
                let mut r = lie_bracket(&ehat[a], &ehat[b]);
                for c in 0..d {
                    let cc = spec.c(a, b, c);
                    if cc != 0.0 {
                        for alpha in 0..n {
                            r[alpha] -= cc * ehat[c].0[alpha];
                        }
                    }
                }
                res[1] = res[1].max(max_abs(&r));

                // (6) [Etilde_a, Ehat_b] = 0
                let r = lie_bracket(&etilde[a], &ehat[b]);
                res[5] = res[5].max(max_abs(&r));
            }
        }
        for i in 0..nb {
            for a in 0..d {
                // (3) [X_i, Etilde_a] = 0
                let r = lie_bracket(&xi[i], &etilde[a]);
                res[2] = res[2].max(max_abs(&r));

                // (4) [X_i, Ehat_a] = Upsilon^b_ia Ehat_b
                let mut r = lie_bracket(&xi[i], &ehat[a]);
                for b in 0..d {
                    let ups = upsilon[(b * nb + i) * d + a];
                    if ups != 0.0 {
                        for alpha in 0..n {
                            r[alpha] -= ups * ehat[b].0[alpha];
                        }
                    }
                }
                res[3] = res[3].max(max_abs(&r));
            }
            for j in 0..nb {
                // (5) [X_i, X_j] = -K^a_ij Ehat_a
                let mut r = lie_bracket(&xi[i], &xi[j]);
                for a in 0..d {
                    let k = curvature[(a * nb + i) * nb + j];
                    if k != 0.0 {
                        for alpha in 0..n {
                            r[alpha] += k * ehat[a].0[alpha];
                        }
                    }
                }
                res[4] = res[4].max(max_abs(&r));
            }
        }
        Ok(res)
    }
}

/// Coordinate components of the three frames, columns indexed by the frame
/// label, rows by the coordinate.
pub struct FrameComponents {
    pub xi: Vec<Vec<Dual2>>,
    pub ehat: Vec<Vec<Dual2>>,
    pub etilde: Vec<Vec<Dual2>>,
}

fn values_of(m: &[Vec<Dual2>], rows: usize, cols: usize) -> Result<DenseMatrix> {
    if m.len() != rows {
        return Err(CoreError::DimensionMismatch { expected: rows, got: m.len() });
    }
    let mut out = DenseMatrix::zeros(rows, cols);
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(CoreError::DimensionMismatch { expected: cols, got: row.len() });
        }
        for (j, entry) in row.iter().enumerate() {
            out.set(i, j, entry.value());
        }
    }
    Ok(out)
}
