//! Reconstruction of full trajectories from reduced ones.
//!
//! The Hessian of a G-regular Lagrangian induces a principal connection on
//! `TQ x R -> (TQ/G) x R`: with blocks `g_ij = X_i^V(X_j^V(L))`,
//! `g_ib = X_i^V(Etilde_b^V(L))`, `g_ab = Etilde_a^V(Etilde_b^V(L))` and
//! `B^a_i = g^{ba} g_ib`, the connection map sends `X_i^C -> B^a_i E_a`,
//! `Etilde_a^C -> E_a`, and annihilates vertical lifts and `d/ds`.
//!
//! The pipeline: horizontally lift the reduced trajectory (an ODE for the
//! fiber coordinate driven by the horizontality condition), read off
//! `xi(t) = A w + B v` along the lift, solve the group equation
//! `gdot = g xi(t)` from the identity, and act with `g(t)` on the lift.
//!
//! The group equation is stepped by a fourth-order two-point Gauss Magnus
//! method (one exponential per step, `xi` at the Gauss nodes from cubic
//! interpolation of the lift samples), so `g(t)` stays exactly on the group
//! and the cross-route deviation keeps the integrator's fourth-order decay.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bundle::{BundleChart, FullState};
use crate::contact::{energy, jet, ContactLagrangian};
use crate::error::{CoreError, Result};
use crate::lie::{bracket, GroupElement};
use crate::numerics::{rk4_step, DenseMatrix, Dual2};
use crate::reduction::{lph_rhs, reduce_lagrangian};
use crate::trajectory::Trajectory;

/// Hessian blocks of `L` in the frame `{X_i, Etilde_a}` and the connection
/// coefficients `B^a_i = g^{ba} g_ib`.
pub struct HessianBlocks {
    pub g_ij: DenseMatrix,
    /// `g_ib[i][b]`, base rows, fiber columns.
    pub g_ib: DenseMatrix,
    pub g_ab: DenseMatrix,
    /// `b[a][i]`.
    pub b: DenseMatrix,
}

/// Pushes the natural velocity Hessian through the frame components.
/// Fails with [`CoreError::NonGRegularAtState`] when `g_ab` is singular.
pub fn hessian_blocks(
    lag: &ContactLagrangian,
    chart: &BundleChart,
    q: &[f64],
    u: &[f64],
    s: f64,
) -> Result<HessianBlocks> {
    let (nb, d) = (chart.base_dim(), chart.fiber_dim());
    let w = jet(lag, q, u, s)?.w;
    let (xi, _) = chart.frame_matrices(q)?;
    let etilde = chart.etilde_matrix(q)?;

    let w_xi = w.mat_mul(&xi);
    let w_et = w.mat_mul(&etilde);
    let g_ij = xi.transpose().mat_mul(&w_xi);
    let g_ib = xi.transpose().mat_mul(&w_et);
    let g_ab = etilde.transpose().mat_mul(&w_et);

    let mut b = DenseMatrix::zeros(d, nb);
    for i in 0..nb {
        let rhs: Vec<f64> = (0..d).map(|bb| g_ib.get(i, bb)).collect();
        let col = g_ab.lu_solve(&rhs).map_err(|e| match e {
            CoreError::SingularMatrix => CoreError::NonGRegularAtState,
            other => other,
        })?;
        for a in 0..d {
            b.set(a, i, col[a]);
        }
    }
    Ok(HessianBlocks { g_ij, g_ib, g_ab, b })
}

/// Result of a reconstruction run.
pub struct ReconstructionResult {
    /// The horizontal lift of the reduced trajectory (adapted coordinates,
    /// with the reconstruction velocity `xi` stored as diagnostics).
    pub horizontal_lift: Trajectory,
    /// The group curve `g(t)` solving `gdot = g xi(t)`, starting at the
    /// identity.
    pub group_curve: Vec<(f64, GroupElement)>,
    /// The reassembled full trajectory `g(t) . lift(t)`.
    pub full_trajectory: Trajectory,
}

fn adapted_labels(chart: &BundleChart) -> Vec<String> {
    let (nb, d) = (chart.base_dim(), chart.fiber_dim());
    let mut labels: Vec<String> = Vec::new();
    for i in 0..nb {
        labels.push(format!("q{i}"));
    }
    for a in 0..d {
        labels.push(format!("qf{a}"));
    }
    for i in 0..nb {
        labels.push(format!("v{i}"));
    }
    for a in 0..d {
        labels.push(format!("w{a}"));
    }
    labels.push("s".to_string());
    labels
}

/// Reconstruction velocity `xi^a = A^a_b(h) w^b + B^a_i v^i` at an adapted
/// full state.
fn xi_at(
    lag: &ContactLagrangian,
    chart: &BundleChart,
    q_base: &[f64],
    h_fiber: &[f64],
    v: &[f64],
    w: &[f64],
    s: f64,
) -> Result<Vec<f64>> {
    let d = chart.fiber_dim();
    let mut q = q_base.to_vec();
    q.extend_from_slice(h_fiber);
    let u = chart.from_quasi(&q, v, w)?;
    let blocks = hessian_blocks(lag, chart, &q, &u, s)?;
    let g = chart.fiber_element(h_fiber)?;
    let a = chart.adjoint_at(&g)?;
    let mut xi = a.mat_vec(w);
    for aa in 0..d {
        for i in 0..chart.base_dim() {
            xi[aa] += blocks.b.get(aa, i) * v[i];
        }
    }
    Ok(xi)
}

/// Horizontally lifts a reduced trajectory through `start`.
///
/// The fiber coordinate solves the horizontality condition: the Ehat-frame
/// coefficients `b^c` of the fiber velocity satisfy
/// `A^a_c b^c + B^a_i qdot^i = 0`, converted to coordinate velocities through
/// the Ehat components `K A`. The reduced components ride along as one joint
/// ODE (their right-hand side does not see the fiber, so they reproduce the
/// input trajectory exactly), and each knot records `xi = A w + B v` for the
/// reconstruction equation.
pub fn horizontal_lift(
    reduced: &Trajectory,
    chart: &Arc<BundleChart>,
    lag: &Arc<ContactLagrangian>,
    start: &FullState,
) -> Result<Trajectory> {
    let (nb, d) = (chart.base_dim(), chart.fiber_dim());
    if reduced.len() < 2 {
        return Err(CoreError::InvalidParameter("reduced trajectory needs at least two knots"));
    }
    let first = &reduced.states[0];
    let mut projected = start.q_base.clone();
    projected.extend_from_slice(&start.v);
    projected.extend_from_slice(&start.w);
    projected.push(start.s);
    for (a, b) in first.iter().zip(&projected) {
        if (a - b).abs() > 1e-9 {
            return Err(CoreError::InvalidParameter(
                "start state does not project onto the reduced trajectory",
            ));
        }
    }

    let l = reduce_lagrangian(lag, chart);
    let red_dim = 2 * nb + d + 1;
    let rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let qb = &y[..nb];
        let v = &y[nb..2 * nb];
        let w = &y[2 * nb..2 * nb + d];
        let s = y[red_dim - 1];
        let h_fiber = &y[red_dim..];

        let state = crate::bundle::ReducedState {
            q_base: qb.to_vec(),
            v: v.to_vec(),
            w: w.to_vec(),
            s,
        };
        let deriv = lph_rhs(&l, &state)?;

        let mut q = qb.to_vec();
        q.extend_from_slice(h_fiber);
        let u = chart.from_quasi(&q, v, w)?;
        let blocks = hessian_blocks(lag, chart, &q, &u, s)?;
        let g = chart.fiber_element(h_fiber)?;
        let a = chart.adjoint_at(&g)?;
        let k = chart.k_at(h_fiber)?;

        // A^a_c b^c = -B^a_i v^i, then hdot = (K A) b.
        let minus_bv: Vec<f64> = (0..d)
            .map(|aa| -(0..nb).map(|i| blocks.b.get(aa, i) * v[i]).sum::<f64>())
            .collect();
        let b_coef = a.lu_solve(&minus_bv)?;
        let hdot = k.mat_mul(&a).mat_vec(&b_coef);

        let mut out = Vec::with_capacity(red_dim + d);
        out.extend_from_slice(v);
        out.extend_from_slice(&deriv.vdot);
        out.extend_from_slice(&deriv.wdot);
        out.push(deriv.sdot);
        out.extend_from_slice(&hdot);
        Ok(out)
    };

    let mut traj = Trajectory::new(adapted_labels(chart));
    let mut xi_channels: Vec<Vec<f64>> = vec![Vec::new(); d];

    let mut y = Vec::with_capacity(red_dim + d);
    y.extend_from_slice(&reduced.states[0][..red_dim - 1]);
    y.push(reduced.states[0][red_dim - 1]);
    y.extend_from_slice(&start.q_fiber);

    let push_knot = |traj: &mut Trajectory,
                     xi_channels: &mut Vec<Vec<f64>>,
                     t: f64,
                     y: &[f64]|
     -> Result<()> {
        let qb = &y[..nb];
        let v = &y[nb..2 * nb];
        let w = &y[2 * nb..2 * nb + d];
        let s = y[red_dim - 1];
        let h_fiber = &y[red_dim..];
        let xi = xi_at(lag, chart, qb, h_fiber, v, w, s)?;
        for (chan, val) in xi_channels.iter_mut().zip(&xi) {
            chan.push(*val);
        }
        let mut row = Vec::with_capacity(red_dim + d);
        row.extend_from_slice(qb);
        row.extend_from_slice(h_fiber);
        row.extend_from_slice(v);
        row.extend_from_slice(w);
        row.push(s);
        traj.push(t, row);
        Ok(())
    };

    push_knot(&mut traj, &mut xi_channels, reduced.times[0], &y)?;
    for k in 0..reduced.len() - 1 {
        let t = reduced.times[k];
        let step = reduced.times[k + 1] - t;
        let (next, _) = rk4_step(&rhs, t, &y, step)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFiniteState { t: t + step });
        }
        // The reduced block of the joint system cannot drift from the input.
        debug_assert!(
            next[..red_dim]
                .iter()
                .zip(&reduced.states[k + 1][..red_dim])
                .all(|(a, b)| (a - b).abs() <= 1e-9),
            "joint lift diverged from the reduced trajectory"
        );
        y = next;
        push_knot(&mut traj, &mut xi_channels, reduced.times[k + 1], &y)?;
    }

    for (a, chan) in xi_channels.into_iter().enumerate() {
        traj.set_diagnostic(&format!("xi{a}"), chan);
    }
    Ok(traj)
}

/// Cubic Lagrange interpolation of per-knot vector samples.
fn interp_cubic(times: &[f64], values: &[Vec<f64>], t: f64) -> Vec<f64> {
    let n = times.len();
    debug_assert!(n >= 2);
    let mut k = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    };
    k = k.min(n - 2);
    let window = 4.min(n);
    let lo = k.saturating_sub(1).min(n - window);
    let ts = &times[lo..lo + window];
    let dim = values[0].len();
    let mut out = vec![0.0; dim];
    for (j, tj) in ts.iter().enumerate() {
        let mut weight = 1.0;
        for (m, tm) in ts.iter().enumerate() {
            if m != j {
                weight *= (t - tm) / (tj - tm);
            }
        }
        for (o, val) in out.iter_mut().zip(&values[lo + j]) {
            *o += weight * val;
        }
    }
    out
}

/// Solves the group reconstruction equation `gdot = g xi(t)`, `g(0) = e`,
/// along the lift's time grid by the fourth-order two-point Gauss Magnus
/// step `g_{k+1} = g_k exp(h/2 (xi_1 + xi_2) + sqrt(3) h^2 / 12 [xi_1, xi_2])`.
pub fn reconstruction_ode(
    lift: &Trajectory,
    chart: &BundleChart,
) -> Result<Vec<(f64, GroupElement)>> {
    let d = chart.fiber_dim();
    let group = chart.group();
    let spec = &group.algebra;
    let knots = lift.len();
    let xi_samples: Vec<Vec<f64>> = (0..knots)
        .map(|k| {
            (0..d)
                .map(|a| lift.diagnostic(&format!("xi{a}")).map(|c| c[k]).unwrap_or(0.0))
                .collect()
        })
        .collect();

    let mut curve = Vec::with_capacity(knots);
    let mut g = group.identity()?;
    curve.push((lift.times[0], g.clone()));
    let gauss_offset = 3.0_f64.sqrt() / 6.0;
    for k in 0..knots.saturating_sub(1) {
        let t = lift.times[k];
        let h = lift.times[k + 1] - t;
        let xi1 = interp_cubic(&lift.times, &xi_samples, t + h * (0.5 - gauss_offset));
        let xi2 = interp_cubic(&lift.times, &xi_samples, t + h * (0.5 + gauss_offset));
        let comm = bracket(spec, &xi1, &xi2)?;
        let omega: Vec<f64> = (0..d)
            .map(|a| 0.5 * h * (xi1[a] + xi2[a]) + 3.0_f64.sqrt() / 12.0 * h * h * comm[a])
            .collect();
        let increment = group.group_exp(&omega)?;
        g = group.left_multiply(&g, &increment)?;
        curve.push((lift.times[k + 1], g.clone()));
    }
    Ok(curve)
}

/// Full reconstruction: horizontal lift, group curve, and the reassembled
/// trajectory `c(t) = g(t) . lift(t)`. Quasi-velocities are invariant under
/// the lifted action, so only the fiber coordinate is moved by `g(t)`.
pub fn reconstruct(
    reduced: &Trajectory,
    chart: &Arc<BundleChart>,
    lag: &Arc<ContactLagrangian>,
    start: &FullState,
) -> Result<ReconstructionResult> {
    let (nb, d) = (chart.base_dim(), chart.fiber_dim());
    let lift = horizontal_lift(reduced, chart, lag, start)?;
    let group_curve = reconstruction_ode(&lift, chart)?;

    let mut full = Trajectory::new(adapted_labels(chart));
    let mut energies = Vec::with_capacity(lift.len());
    for k in 0..lift.len() {
        let state = &lift.states[k];
        let qb = &state[..nb];
        let h_fiber = &state[nb..nb + d];
        let v = &state[nb + d..nb + d + nb];
        let w = &state[nb + d + nb..nb + d + nb + d];
        let s = state[2 * (nb + d)];

        let qf = chart.act_on_fiber(&group_curve[k].1, h_fiber)?;
        let mut q = qb.to_vec();
        q.extend_from_slice(&qf);
        let u = chart.from_quasi(&q, v, w)?;
        energies.push(energy(lag, &q, &u, s)?);

        let mut row = Vec::with_capacity(2 * (nb + d) + 1);
        row.extend_from_slice(qb);
        row.extend_from_slice(&qf);
        row.extend_from_slice(v);
        row.extend_from_slice(w);
        row.push(s);
        full.push(lift.times[k], row);
    }
    full.set_diagnostic("E_L", energies);
    Ok(ReconstructionResult { horizontal_lift: lift, group_curve, full_trajectory: full })
}

/// Residuals of the connection-map axioms at a state.
pub struct OmegaResiduals {
    /// `Omega(X_i^V)`, `Omega(Etilde_a^V)`.
    pub vertical_lifts: f64,
    /// `Omega(d/ds)`.
    pub s_direction: f64,
    /// `Omega(H_i)` with `H_i = X_i^C - B^a_i Etilde_a^C`.
    pub horizontal: f64,
    /// `Omega(Etilde_a^C) - E_a`.
    pub etilde_complete: f64,
    /// `Omega(Ehat_a^C) - A^b_a E_b`.
    pub ehat_complete: f64,
}

impl OmegaResiduals {
    pub fn max(&self) -> f64 {
        self.vertical_lifts
            .max(self.s_direction)
            .max(self.horizontal)
            .max(self.etilde_complete)
            .max(self.ehat_complete)
    }
}

/// Assembles the connection map from the Hessian blocks and applies it to
/// independently computed lift components.
pub fn omega_axioms_check(
    lag: &ContactLagrangian,
    chart: &BundleChart,
    q: &[f64],
    u: &[f64],
    s: f64,
) -> Result<OmegaResiduals> {
    let (nb, d, n) = (chart.base_dim(), chart.fiber_dim(), chart.dim());
    let dim = 2 * n + 1;
    let frames = chart.frames_dual(&Dual2::seed_all(q))?;
    let blocks = hessian_blocks(lag, chart, q, u, s)?;

    // Complete and vertical lift coordinate components of a frame column.
    let complete = |cols: &Vec<Vec<Dual2>>, idx: usize| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for alpha in 0..n {
            out[alpha] = cols[alpha][idx].value();
            out[n + alpha] = cols[alpha][idx]
                .gradient()
                .iter()
                .zip(u)
                .map(|(jv, ub)| jv * ub)
                .sum();
        }
        out
    };
    let vertical = |cols: &Vec<Vec<Dual2>>, idx: usize| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for alpha in 0..n {
            out[n + alpha] = cols[alpha][idx].value();
        }
        out
    };

    // Frame expansion matrix: columns X^C, Etilde^C, X^V, Etilde^V, d/ds.
    let mut f2 = DenseMatrix::zeros(dim, dim);
    let mut set_col = |f2: &mut DenseMatrix, col: usize, comps: &[f64]| {
        for (row, val) in comps.iter().enumerate() {
            f2.set(row, col, *val);
        }
    };
    for i in 0..nb {
        set_col(&mut f2, i, &complete(&frames.xi, i));
        set_col(&mut f2, nb + d + i, &vertical(&frames.xi, i));
    }
    for a in 0..d {
        set_col(&mut f2, nb + a, &complete(&frames.etilde, a));
        set_col(&mut f2, nb + d + nb + a, &vertical(&frames.etilde, a));
    }
    f2.set(2 * n, 2 * n, 1.0);

    let omega = |vecq: &[f64]| -> Result<Vec<f64>> {
        let coeffs = f2.lu_solve(vecq)?;
        let mut out = vec![0.0; d];
        for a in 0..d {
            out[a] = coeffs[nb + a];
            for i in 0..nb {
                out[a] += blocks.b.get(a, i) * coeffs[i];
            }
        }
        Ok(out)
    };
    let max_abs = |x: &[f64]| x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let mut vertical_lifts = 0.0_f64;
    for i in 0..nb {
        vertical_lifts = vertical_lifts.max(max_abs(&omega(&vertical(&frames.xi, i))?));
    }
    for a in 0..d {
        vertical_lifts = vertical_lifts.max(max_abs(&omega(&vertical(&frames.etilde, a))?));
    }

    let mut s_dir = vec![0.0; dim];
    s_dir[2 * n] = 1.0;
    let s_direction = max_abs(&omega(&s_dir)?);

    let mut horizontal = 0.0_f64;
    for i in 0..nb {
        let mut h_i = complete(&frames.xi, i);
        for a in 0..d {
            let et_c = complete(&frames.etilde, a);
            for (hv, ev) in h_i.iter_mut().zip(&et_c) {
                *hv -= blocks.b.get(a, i) * ev;
            }
        }
        horizontal = horizontal.max(max_abs(&omega(&h_i)?));
    }

    let mut etilde_complete = 0.0_f64;
    for a in 0..d {
        let mut res = omega(&complete(&frames.etilde, a))?;
        res[a] -= 1.0;
        etilde_complete = etilde_complete.max(max_abs(&res));
    }

    let g = chart.fiber_element(&q[nb..])?;
    let adj = chart.adjoint_at(&g)?;
    let mut ehat_complete = 0.0_f64;
    for a in 0..d {
        let mut res = omega(&complete(&frames.ehat, a))?;
        for b in 0..d {
            res[b] -= adj.get(b, a);
        }
        ehat_complete = ehat_complete.max(max_abs(&res));
    }

    Ok(OmegaResiduals { vertical_lifts, s_direction, horizontal, etilde_complete, ehat_complete })
}

/// The invariance identity of the horizontal distribution,
/// `Etilde_a^C(B^d_i) = B^b_i C^d_{ab}`, checked by central finite
/// differences of `B` along the fundamental complete lifts (the outer
/// derivative needs third derivatives of `L`, beyond the dual jets).
pub fn equivariance_check(
    lag: &ContactLagrangian,
    chart: &BundleChart,
    q: &[f64],
    u: &[f64],
    s: f64,
) -> Result<f64> {
    let (nb, d, n) = (chart.base_dim(), chart.fiber_dim(), chart.dim());
    let spec = &chart.group().algebra;
    let frames = chart.frames_dual(&Dual2::seed_all(q))?;
    let blocks = hessian_blocks(lag, chart, q, u, s)?;

    let eps = 1e-5;
    let mut worst = 0.0_f64;
    for a in 0..d {
        let mut dq = vec![0.0; n];
        let mut du = vec![0.0; n];
        for alpha in 0..n {
            dq[alpha] = frames.etilde[alpha][a].value();
            du[alpha] = frames.etilde[alpha][a]
                .gradient()
                .iter()
                .zip(u)
                .map(|(jv, ub)| jv * ub)
                .sum();
        }
        let shifted = |sign: f64| -> Result<DenseMatrix> {
            let qs: Vec<f64> = q.iter().zip(&dq).map(|(x, dx)| x + sign * eps * dx).collect();
            let us: Vec<f64> = u.iter().zip(&du).map(|(x, dx)| x + sign * eps * dx).collect();
            Ok(hessian_blocks(lag, chart, &qs, &us, s)?.b)
        };
        let (bp, bm) = (shifted(1.0)?, shifted(-1.0)?);
        for dd in 0..d {
            for i in 0..nb {
                let fd = (bp.get(dd, i) - bm.get(dd, i)) / (2.0 * eps);
                let mut expected = 0.0;
                for b in 0..d {
                    expected += blocks.b.get(b, i) * spec.c(a, b, dd);
                }
                worst = worst.max((fd - expected).abs());
            }
        }
    }
    Ok(worst)
}

/// Horizontality of a computed lift: finite-differences the fiber coordinate
/// at interior knots, decomposes in the Ehat frame, and evaluates
/// `Omega(lift velocity) = A b + B v`.
pub fn lift_horizontality_residual(
    lift: &Trajectory,
    chart: &BundleChart,
    lag: &ContactLagrangian,
) -> Result<f64> {
    let (nb, d) = (chart.base_dim(), chart.fiber_dim());
    if d == 0 {
        return Ok(0.0);
    }
    let mut worst = 0.0_f64;
    for k in 1..lift.len().saturating_sub(1) {
        let dt = lift.times[k + 1] - lift.times[k - 1];
        let state = &lift.states[k];
        let qb = &state[..nb];
        let h_fiber = &state[nb..nb + d];
        let v = &state[nb + d..nb + d + nb];
        let w = &state[nb + d + nb..nb + d + nb + d];
        let s = state[2 * (nb + d)];

        let hdot: Vec<f64> = (0..d)
            .map(|a| (lift.states[k + 1][nb + a] - lift.states[k - 1][nb + a]) / dt)
            .collect();

        let mut q = qb.to_vec();
        q.extend_from_slice(h_fiber);
        let u = chart.from_quasi(&q, v, w)?;
        let blocks = hessian_blocks(lag, chart, &q, &u, s)?;
        let g = chart.fiber_element(h_fiber)?;
        let a = chart.adjoint_at(&g)?;
        let k_mat = chart.k_at(h_fiber)?;
        let b_coef = k_mat.mat_mul(&a).lu_solve(&hdot)?;

        for aa in 0..d {
            let mut res = (0..d).map(|c| a.get(aa, c) * b_coef[c]).sum::<f64>();
            for i in 0..nb {
                res += blocks.b.get(aa, i) * v[i];
            }
            worst = worst.max(res.abs());
        }
    }
    Ok(worst)
}
