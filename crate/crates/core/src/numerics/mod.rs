//! Self-contained numerical kernels: dense linear algebra, forward-mode
//! dual-number differentiation, the matrix exponential, and fixed-step RK4.
//!
//! Everything here works on plain `f64` data (or [`Dual2`] jets) and has no
//! state; all higher modules are built on these four primitives.

mod dual;
mod matrix;
mod ode;

pub use dual::{dual_mat_mul, dual_mat_vec, dual_solve, Dual2};
pub use matrix::{mat_exp, DenseMatrix};
pub use ode::{rk4_integrate, rk4_step, OdeProblem};
