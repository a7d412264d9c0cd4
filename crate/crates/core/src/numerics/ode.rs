//! Classical fixed-step fourth-order Runge-Kutta integration.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};

/// A first-order ODE `dy/dt = rhs(t, y)` of fixed dimension.
pub struct OdeProblem<'a> {
    pub dimension: usize,
    pub rhs: &'a dyn Fn(f64, &[f64]) -> Result<Vec<f64>>,
}

/// One classical RK4 step. Returns the next state and the four stage slopes
/// (the stage slopes carry quantities like the Lagrangian value at internal
/// stage states, used for per-step diagnostics).
pub fn rk4_step(
    rhs: &dyn Fn(f64, &[f64]) -> Result<Vec<f64>>,
    t: f64,
    y: &[f64],
    h: f64,
) -> Result<(Vec<f64>, [Vec<f64>; 4])> {
    let n = y.len();
    let mut scratch = vec![0.0; n];

    let k1 = rhs(t, y)?;
    for i in 0..n {
        scratch[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = rhs(t + 0.5 * h, &scratch)?;
    for i in 0..n {
        scratch[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = rhs(t + 0.5 * h, &scratch)?;
    for i in 0..n {
        scratch[i] = y[i] + h * k3[i];
    }
    let k4 = rhs(t + h, &scratch)?;

    let mut next = vec![0.0; n];
    for i in 0..n {
        next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok((next, [k1, k2, k3, k4]))
}

/// Integrates `p` from `t0` to `t1` with step `h`; the final step is
/// shortened so the grid lands exactly on `t1`.
///
/// Fails with [`CoreError::NonFiniteState`] as soon as any component becomes
/// NaN or infinite, which signals either blow-up or a singular Hessian en
/// route.
pub fn rk4_integrate(
    p: &OdeProblem<'_>,
    y0: &[f64],
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if h <= 0.0 {
        return Err(CoreError::InvalidParameter("step size must be positive"));
    }
    if t1 <= t0 {
        return Err(CoreError::InvalidParameter("t1 must exceed t0"));
    }
    if y0.len() != p.dimension {
        return Err(CoreError::DimensionMismatch { expected: p.dimension, got: y0.len() });
    }

    let mut out = Vec::new();
    let mut t = t0;
    let mut y = y0.to_vec();
    out.push((t, y.clone()));
    while t < t1 - 1e-12 * (t1 - t0).max(1.0) {
        let step = h.min(t1 - t);
        let (next, _) = rk4_step(p.rhs, t, &y, step)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFiniteState { t: t + step });
        }
        t += step;
        y = next;
        out.push((t, y.clone()));
    }
    Ok(out)
}
