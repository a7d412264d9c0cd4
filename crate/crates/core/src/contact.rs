//! Full (unreduced) contact Lagrangian dynamics.
//!
//! For a regular Lagrangian `L(q, u, s)` the dynamics is the Herglotz vector
//! field: `qdot = u`, `sdot = L`, and accelerations solving
//!
//! ```text
//! Gamma^b W_ba + u^b d2L/dq^b du^a + L d2L/ds du^a - dL/dq^a
//!     = dL/ds dL/du^a
//! ```
//!
//! with `W` the velocity Hessian. One dense solve per right-hand-side
//! evaluation (four per RK4 step); `W` depends on the state so nothing is
//! factored ahead of time. States here use natural velocities; quasi-velocity
//! views live in [`crate::bundle`].

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::bundle::BundleChart;
use crate::error::{CoreError, Result};
use crate::numerics::{rk4_step, DenseMatrix, Dual2};
use crate::trajectory::Trajectory;

type LagrangianFn = Box<dyn Fn(&[Dual2], &[Dual2], &Dual2) -> Result<Dual2> + Send + Sync>;

/// A contact Lagrangian `L: TQ x R -> R`, evaluated on dual numbers so every
/// derivative in the equations of motion is exact.
pub struct ContactLagrangian {
    n: usize,
    eval: LagrangianFn,
}

impl ContactLagrangian {
    pub fn new(n: usize, eval: LagrangianFn) -> Self {
        Self { n, eval }
    }

    /// Configuration dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eval_dual(&self, q: &[Dual2], u: &[Dual2], s: &Dual2) -> Result<Dual2> {
        (self.eval)(q, u, s)
    }

    /// Plain value of `L`.
    pub fn value(&self, q: &[f64], u: &[f64], s: f64) -> Result<f64> {
        let q = Dual2::constants(q, 0);
        let u = Dual2::constants(u, 0);
        Ok((self.eval)(&q, &u, &Dual2::constant(s, 0))?.value())
    }
}

/// All first derivatives of `L` plus the second-derivative blocks entering
/// the Herglotz linear system.
pub struct LagrangianJet {
    pub l: f64,
    pub dldq: Vec<f64>,
    pub dldu: Vec<f64>,
    pub dlds: f64,
    /// Velocity Hessian `W_ab = d2L/du^a du^b` (symmetric).
    pub w: DenseMatrix,
    /// Mixed block `mqu[b][a] = d2L/dq^b du^a`.
    pub mqu: DenseMatrix,
    /// `msu[a] = d2L/ds du^a`.
    pub msu: Vec<f64>,
}

/// Full second-order jet of `L` at `(q, u, s)` by dual-number propagation.
pub fn jet(lag: &ContactLagrangian, q: &[f64], u: &[f64], s: f64) -> Result<LagrangianJet> {
    let n = lag.dim();
    if q.len() != n || u.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: q.len().max(u.len()) });
    }
    let m = 2 * n + 1;
    let qd: Vec<Dual2> = q.iter().enumerate().map(|(i, &v)| Dual2::seeded(v, m, i)).collect();
    let ud: Vec<Dual2> =
        u.iter().enumerate().map(|(i, &v)| Dual2::seeded(v, m, n + i)).collect();
    let sd = Dual2::seeded(s, m, 2 * n);
    let f = lag.eval_dual(&qd, &ud, &sd)?;

    let grad = f.gradient();
    let mut w = DenseMatrix::zeros(n, n);
    let mut mqu = DenseMatrix::zeros(n, n);
    let mut msu = vec![0.0; n];
    for a in 0..n {
        msu[a] = f.hessian(2 * n, n + a);
        for b in 0..n {
            w.set(a, b, f.hessian(n + a, n + b));
            mqu.set(b, a, f.hessian(b, n + a));
        }
    }
    Ok(LagrangianJet {
        l: f.value(),
        dldq: grad[..n].to_vec(),
        dldu: grad[n..2 * n].to_vec(),
        dlds: grad[2 * n],
        w,
        mqu,
        msu,
    })
}

/// The contact Lagrangian energy `E_L = u^a dL/du^a - L`.
pub fn energy(lag: &ContactLagrangian, q: &[f64], u: &[f64], s: f64) -> Result<f64> {
    let n = lag.dim();
    let qd = Dual2::constants(q, n);
    let ud: Vec<Dual2> = u.iter().enumerate().map(|(i, &v)| Dual2::seeded(v, n, i)).collect();
    let f = lag.eval_dual(&qd, &ud, &Dual2::constant(s, n))?;
    let dldu = f.gradient();
    Ok(u.iter().zip(dldu).map(|(ui, di)| ui * di).sum::<f64>() - f.value())
}

/// Herglotz accelerations: solves the Eq.-of-motion linear system
/// `W udot = dL/dq + dL/ds dL/du - mqu^T u - L msu` and returns
/// `(udot, sdot = L)`.
pub fn herglotz_rhs(
    lag: &ContactLagrangian,
    q: &[f64],
    u: &[f64],
    s: f64,
) -> Result<(Vec<f64>, f64)> {
    let j = jet(lag, q, u, s)?;
    let n = lag.dim();
    let mut rhs = vec![0.0; n];
    for a in 0..n {
        let mut acc = j.dldq[a] + j.dlds * j.dldu[a] - j.l * j.msu[a];
        for b in 0..n {
            acc -= u[b] * j.mqu.get(b, a);
        }
        rhs[a] = acc;
    }
    let udot = j.w.lu_solve(&rhs).map_err(|e| match e {
        CoreError::SingularMatrix => CoreError::NonRegularLagrangianAtState,
        other => other,
    })?;
    Ok((udot, j.l))
}

/// Residual of the Herglotz equation with the computed accelerations
/// substituted back (self-consistency of the linear solve).
pub fn herglotz_residual(lag: &ContactLagrangian, q: &[f64], u: &[f64], s: f64) -> Result<f64> {
    let j = jet(lag, q, u, s)?;
    let (udot, _) = herglotz_rhs(lag, q, u, s)?;
    let n = lag.dim();
    let mut res = 0.0_f64;
    for a in 0..n {
        let mut acc = -j.dldq[a] - j.dlds * j.dldu[a] + j.l * j.msu[a];
        for b in 0..n {
            acc += udot[b] * j.w.get(b, a) + u[b] * j.mqu.get(b, a);
        }
        res = res.max(acc.abs());
    }
    Ok(res)
}

/// The frame form of the Herglotz condition in the standard frame:
/// `Gamma(dL/du^a) - dL/dq^a - dL/ds dL/du^a = 0`, with the directional
/// derivative along `Gamma` taken by a dedicated dual seed rather than by
/// rearranging the linear system.
pub fn frame_herglotz_residual(
    lag: &ContactLagrangian,
    q: &[f64],
    u: &[f64],
    s: f64,
) -> Result<f64> {
    let n = lag.dim();
    let j = jet(lag, q, u, s)?;
    let (udot, sdot) = herglotz_rhs(lag, q, u, s)?;

    // Seed 0 moves along Gamma = (u, udot, L); seeds 1..=n are the u-basis,
    // so the mixed Hessian entry (0, 1+a) is Gamma(dL/du^a).
    let m = n + 1;
    let mut qd = Vec::with_capacity(n);
    let mut ud = Vec::with_capacity(n);
    for a in 0..n {
        qd.push(Dual2::with_seeds(q[a], m, &[(0, u[a])]));
        ud.push(Dual2::with_seeds(u[a], m, &[(0, udot[a]), (1 + a, 1.0)]));
    }
    let sd = Dual2::with_seeds(s, m, &[(0, sdot)]);
    let f = lag.eval_dual(&qd, &ud, &sd)?;

    let mut res = 0.0_f64;
    for a in 0..n {
        let gamma_of_dldu = f.hessian(0, 1 + a);
        res = res.max((gamma_of_dldu - j.dldq[a] - j.dlds * j.dldu[a]).abs());
    }
    Ok(res)
}

/// Residuals of the defining identities of the contact structure at a state:
/// the Reeb contractions `i_R eta = 1`, `i_R deta = 0`, and the energy pairing
/// `eta(Gamma) = -E_L`.
pub struct ContactFormResiduals {
    pub reeb_eta: f64,
    pub reeb_deta: f64,
    pub eta_gamma_energy: f64,
}

impl ContactFormResiduals {
    pub fn max(&self) -> f64 {
        self.reeb_eta.max(self.reeb_deta).max(self.eta_gamma_energy)
    }
}

/// Assembles `eta_L`, `d eta_L`, and the Reeb field at a state and returns
/// the identity residuals.
pub fn contact_form_check(
    lag: &ContactLagrangian,
    q: &[f64],
    u: &[f64],
    s: f64,
) -> Result<ContactFormResiduals> {
    let n = lag.dim();
    let j = jet(lag, q, u, s)?;
    let dim = 2 * n + 1;

    // d eta_L as a bilinear form D with deta(V, W) = V^T D W, coordinates
    // ordered (q, u, s).
    let mut d = DenseMatrix::zeros(dim, dim);
    let mut add_two_form = |p: usize, r: usize, c: f64| {
        d.set(p, r, d.get(p, r) + c);
        d.set(r, p, d.get(r, p) - c);
    };
    for a in 0..n {
        // -d2L/ds du^a  ds ^ dq^a
        add_two_form(2 * n, a, -j.msu[a]);
        for b in 0..n {
            // -d2L/dq^b du^a  dq^b ^ dq^a  and  -W_ba  du^b ^ dq^a
            add_two_form(b, a, -j.mqu.get(b, a));
            add_two_form(n + b, a, -j.w.get(b, a));
        }
    }

    // Reeb field R = d/ds - W^{ab} d2L/ds du^b d/du^a.
    let r_u = j.w.lu_solve(&j.msu).map_err(|e| match e {
        CoreError::SingularMatrix => CoreError::NonRegularLagrangianAtState,
        other => other,
    })?;
    let mut reeb = vec![0.0; dim];
    for a in 0..n {
        reeb[n + a] = -r_u[a];
    }
    reeb[2 * n] = 1.0;

    // eta = ds - dL/du^a dq^a
    let eta_of = |vec: &[f64]| -> f64 {
        vec[2 * n] - j.dldu.iter().zip(vec).map(|(d, v)| d * v).sum::<f64>()
    };
    let reeb_eta = (eta_of(&reeb) - 1.0).abs();

    let mut reeb_deta = 0.0_f64;
    for col in 0..dim {
        let mut acc = 0.0;
        for row in 0..dim {
            acc += reeb[row] * d.get(row, col);
        }
        reeb_deta = reeb_deta.max(acc.abs());
    }

    let (udot, sdot) = herglotz_rhs(lag, q, u, s)?;
    let mut gamma = vec![0.0; dim];
    gamma[..n].copy_from_slice(u);
    gamma[n..2 * n].copy_from_slice(&udot);
    gamma[2 * n] = sdot;
    let e = energy(lag, q, u, s)?;
    let eta_gamma_energy = (eta_of(&gamma) + e).abs();

    Ok(ContactFormResiduals { reeb_eta, reeb_deta, eta_gamma_energy })
}

/// Integrates the Herglotz dynamics from natural initial data over `[0, t1]`
/// with step `h`.
///
/// State labels are `q0.., u0.., s`. Per-knot diagnostics:
///
/// * `E_L` - the contact energy,
/// * `dissipation_residual` - `E_L(t) - e(t)` where `e` solves the contact
///   dissipation law `de/dt = (dL/ds) e` alongside the trajectory, so the
///   channel isolates violations of the law from integrator error,
/// * `sdot_residual` - difference between the RK4 increment of `s` and a
///   Simpson re-quadrature of `L` through the accepted endpoint.
pub fn integrate_full(
    lag: &ContactLagrangian,
    q0: &[f64],
    u0: &[f64],
    s0: f64,
    t1: f64,
    h: f64,
) -> Result<Trajectory> {
    let n = lag.dim();
    if h <= 0.0 {
        return Err(CoreError::InvalidParameter("step size must be positive"));
    }
    if t1 <= 0.0 {
        return Err(CoreError::InvalidParameter("t1 must be positive"));
    }

    let rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (q, rest) = y.split_at(n);
        let (u, rest) = rest.split_at(n);
        let s = rest[0];
        let e_aux = rest[1];
        let jet_here = jet(lag, q, u, s)?;
        let mut rhs_vec = vec![0.0; n];
        for a in 0..n {
            let mut acc = jet_here.dldq[a] + jet_here.dlds * jet_here.dldu[a]
                - jet_here.l * jet_here.msu[a];
            for b in 0..n {
                acc -= u[b] * jet_here.mqu.get(b, a);
            }
            rhs_vec[a] = acc;
        }
        let udot = jet_here.w.lu_solve(&rhs_vec).map_err(|e| match e {
            CoreError::SingularMatrix => CoreError::NonRegularLagrangianAtState,
            other => other,
        })?;
        let mut out = Vec::with_capacity(2 * n + 2);
        out.extend_from_slice(u);
        out.extend_from_slice(&udot);
        out.push(jet_here.l);
        out.push(jet_here.dlds * e_aux);
        Ok(out)
    };

    let mut labels: Vec<String> = Vec::new();
    for i in 0..n {
        labels.push(format!("q{i}"));
    }
    for i in 0..n {
        labels.push(format!("u{i}"));
    }
    labels.push("s".to_string());
    let mut traj = Trajectory::new(labels);

    let e0 = energy(lag, q0, u0, s0)?;
    let mut y = Vec::with_capacity(2 * n + 2);
    y.extend_from_slice(q0);
    y.extend_from_slice(u0);
    y.push(s0);
    y.push(e0);

    let mut energies = vec![e0];
    let mut dissipation = vec![0.0];
    let mut sdot_res = vec![0.0];
    traj.push(0.0, y[..2 * n + 1].to_vec());

    let mut t = 0.0;
    let mut l_here = lag.value(q0, u0, s0)?;
    while t < t1 - 1e-12 * t1.max(1.0) {
        let step = h.min(t1 - t);
        let (next, stages) = rk4_step(&rhs, t, &y, step)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFiniteState { t: t + step });
        }
        let (q, rest) = next.split_at(n);
        let (u, rest) = rest.split_at(n);
        let s = rest[0];
        let e_aux = rest[1];

        let l_next = lag.value(q, u, s)?;
        let ds = s - y[2 * n];
        // Simpson-style re-quadrature of s against the accepted endpoint.
        let quad = step / 6.0
            * (l_here + 2.0 * stages[1][2 * n] + 2.0 * stages[2][2 * n] + l_next);
        sdot_res.push((ds - quad).abs() / step);

        let e_here = energy(lag, q, u, s)?;
        energies.push(e_here);
        dissipation.push(e_here - e_aux);

        t += step;
        y = next;
        l_here = l_next;
        traj.push(t, y[..2 * n + 1].to_vec());
    }

    traj.set_diagnostic("E_L", energies);
    traj.set_diagnostic("dissipation_residual", dissipation);
    traj.set_diagnostic("sdot_residual", sdot_res);
    Ok(traj)
}

/// Converts a natural-coordinate trajectory to the adapted representation
/// `(q^i, q^a, v^i, w^a, s)`, carrying diagnostics across.
pub fn full_to_adapted(chart: &BundleChart, traj: &Trajectory) -> Result<Trajectory> {
    let n = chart.dim();
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

    let mut out = Trajectory::new(labels);
    for (k, state) in traj.states.iter().enumerate() {
        let q = &state[..n];
        let u = &state[n..2 * n];
        let s = state[2 * n];
        let (v, w) = chart.to_quasi(q, u)?;
        let mut row = Vec::with_capacity(2 * n + 1);
        row.extend_from_slice(q);
        row.extend_from_slice(&v);
        row.extend_from_slice(&w);
        row.push(s);
        out.push(traj.times[k], row);
    }
    out.diagnostics = traj.diagnostics.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    fn free_particle(n: usize) -> ContactLagrangian {
        ContactLagrangian::new(
            n,
            Box::new(move |_q, u, _s| {
                let m = u[0].seeds();
                let mut acc = Dual2::constant(0.0, m);
                for ui in u {
                    acc = acc + (ui * ui) * 0.5;
                }
                Ok(acc)
            }),
        )
    }

    fn damped_oscillator(gamma: f64) -> ContactLagrangian {
        ContactLagrangian::new(
            1,
            Box::new(move |q, u, s| {
                Ok((&u[0] * &u[0]) * 0.5 - (&q[0] * &q[0]) * 0.5 - s * gamma)
            }),
        )
    }

    #[test]
    fn jet_of_free_particle() {
        let lag = free_particle(2);
        let j = jet(&lag, &[0.3, -0.7], &[1.0, 2.0], 0.5).unwrap();
        assert_eq!(j.w, DenseMatrix::identity(2));
        assert!(j.dldq.iter().all(|v| *v == 0.0));
        assert_eq!(j.dlds, 0.0);
        assert_eq!(j.dldu, vec![1.0, 2.0]);
    }

    #[test]
    fn jet_of_damped_oscillator() {
        let gamma = 0.25;
        let lag = damped_oscillator(gamma);
        let j = jet(&lag, &[1.0], &[2.0], 0.7).unwrap();
        assert_eq!(j.dlds, -gamma);
        assert_eq!(j.w.get(0, 0), 1.0);
        assert_eq!(j.dldq, vec![-1.0]);
        assert!(j.msu[0] == 0.0 && j.mqu.get(0, 0) == 0.0);
    }

    #[test]
    fn energy_examples() {
        let lag = free_particle(2);
        let e = energy(&lag, &[0.0, 0.0], &[3.0, 4.0], 0.0).unwrap();
        assert!((e - 12.5).abs() < 1e-14);

        // damped oscillator at (q, u, s) = (1, 2, 0): E = 2*2 - (2 - 1/2) = 2.5
        let lag = damped_oscillator(0.1);
        let e = energy(&lag, &[1.0], &[2.0], 0.0).unwrap();
        assert!((e - 2.5).abs() < 1e-14);

        // u = 0 gives E = -L
        let e = energy(&lag, &[1.2], &[0.0], 0.3).unwrap();
        let l = lag.value(&[1.2], &[0.0], 0.3).unwrap();
        assert!((e + l).abs() < 1e-14);
    }

    #[test]
    fn free_particle_rhs_vanishes() {
        let lag = free_particle(3);
        let u = [1.0, -0.5, 0.25];
        let (udot, sdot) = herglotz_rhs(&lag, &[0.0, 0.0, 0.0], &u, 0.0).unwrap();
        assert!(udot.iter().all(|v| v.abs() < 1e-14));
        let expected = 0.5 * u.iter().map(|x| x * x).sum::<f64>();
        assert!((sdot - expected).abs() < 1e-14);
    }

    #[test]
    fn damped_oscillator_rhs() {
        let gamma = 0.1;
        let lag = damped_oscillator(gamma);
        let (q, u) = (0.8, -0.3);
        let (udot, sdot) = herglotz_rhs(&lag, &[q], &[u], 0.4).unwrap();
        assert!((udot[0] - (-q - gamma * u)).abs() < 1e-14);
        assert!((sdot - lag.value(&[q], &[u], 0.4).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn affine_equations_of_motion() {
        // q thetaddot + xddot = -gamma (xdot + q thetadot)
        // thetaddot + q xddot + 1 = -gamma (thetadot + q xdot)
        // -phiddot / phidot^2 = -gamma / phidot
        let (qc, gamma) = (2.0, 0.1);
        let sc = scenarios::affine_scenario(qc, gamma).unwrap();
        let q = [0.3, 0.2, -0.4];
        let u = [0.9, -0.6, 1.4];
        let (udot, _) = herglotz_rhs(&sc.lagrangian, &q, &u, 0.25).unwrap();
        let (xdd, thdd, phdd) = (udot[0], udot[1], udot[2]);
        let (xd, thd, phd) = (u[0], u[1], u[2]);
        assert!((qc * thdd + xdd + gamma * (xd + qc * thd)).abs() < 1e-12);
        assert!((thdd + qc * xdd + 1.0 + gamma * (thd + qc * xd)).abs() < 1e-12);
        assert!((-phdd / (phd * phd) + gamma / phd).abs() < 1e-12);
    }

    #[test]
    fn free_particle_trajectory_closed_form() {
        let lag = free_particle(2);
        let traj = integrate_full(&lag, &[0.5, -0.2], &[1.0, 0.0], 0.0, 1.0, 0.01).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last[0] - 1.5).abs() < 1e-12);
        assert!((last[1] + 0.2).abs() < 1e-12);
        // s(t) = s0 + t/2 for |u| = 1
        assert!((last[4] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_lagrangian_is_flagged() {
        // L linear in u has a zero Hessian.
        let lag = ContactLagrangian::new(1, Box::new(|_q, u, _s| Ok(u[0].clone())));
        assert!(matches!(
            herglotz_rhs(&lag, &[0.0], &[1.0], 0.0),
            Err(CoreError::NonRegularLagrangianAtState)
        ));
    }

    #[test]
    fn contact_form_identities() {
        // L = |u|^2/2 + s has R = d/ds and zero residuals.
        let lag = ContactLagrangian::new(
            2,
            Box::new(|_q, u, s| {
                Ok((&u[0] * &u[0]) * 0.5 + (&u[1] * &u[1]) * 0.5 + s.clone())
            }),
        );
        let res = contact_form_check(&lag, &[0.1, 0.2], &[0.5, -0.5], 0.3).unwrap();
        assert!(res.max() < 1e-14);

        let lag = damped_oscillator(0.2);
        let res = contact_form_check(&lag, &[0.7], &[-1.1], 0.2).unwrap();
        assert!(res.max() <= 1e-12);
    }

    #[test]
    fn herglotz_self_consistency() {
        let sc = scenarios::affine_scenario(2.0, 0.1).unwrap();
        let res = herglotz_residual(&sc.lagrangian, &[0.1, 0.3, -0.2], &[0.4, 0.8, 1.2], 0.1)
            .unwrap();
        assert!(res <= 1e-10);
    }

    #[test]
    fn frame_herglotz_condition() {
        let sc = scenarios::affine_scenario(2.0, 0.1).unwrap();
        let mut rng = crate::rng::SplitMix64::new(37);
        for _ in 0..10 {
            let q = [rng.range(-0.5, 0.5), rng.range(-0.5, 0.5), rng.range(-0.5, 0.5)];
            let u = [rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(0.5, 1.5)];
            let res = frame_herglotz_residual(&sc.lagrangian, &q, &u, rng.range(-0.3, 0.3))
                .unwrap();
            assert!(res <= 1e-8, "residual {res}");
        }
    }

    #[test]
    fn sdot_residual_scales_like_h3() {
        let lag = damped_oscillator(0.1);
        let max_res = |h: f64| {
            let traj = integrate_full(&lag, &[1.0], &[0.0], 0.0, 1.0, h).unwrap();
            traj.diagnostic("sdot_residual")
                .unwrap()
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()))
        };
        let (r1, r2) = (max_res(0.02), max_res(0.01));
        let ratio = r1 / r2;
        assert!(ratio > 5.0, "expected at least ~8x reduction, got {ratio}");
        assert!(r2 < 1e-7, "residual too large: {r2}");
    }
}
