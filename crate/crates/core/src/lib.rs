//! Numerical engine for dissipative mechanical systems on contact phase space.
//!
//! The crate integrates contact Lagrangian dynamics (the Herglotz equations on
//! `TQ x R`), reduces them by a Lie-group symmetry to the quotient
//! `(TQ/G) x R`, and reconstructs full trajectories from reduced ones through
//! a principal connection induced by the Hessian of the Lagrangian. Both
//! solution routes are exposed so that they can be compared numerically.
//!
//! Module map:
//!
//! * [`numerics`] - dense matrices, LU solves, matrix exponential, RK4
//!   stepping, and forward-mode second-order dual numbers.
//! * [`lie`] - Lie algebras with structure constants, matrix group charts,
//!   exponential and adjoint maps.
//! * [`bundle`] - the principal bundle `Q -> Q/G`: invariant frames,
//!   connection coefficients, curvature, and quasi-velocity conversions.
//! * [`contact`] - the full (unreduced) Herglotz dynamics.
//! * [`reduction`] - the Lagrange-Poincare-Herglotz equations on the quotient.
//! * [`reconstruction`] - horizontal lifts, the group-valued reconstruction
//!   ODE, and reassembly of full trajectories.
//! * [`scenarios`] - built-in systems (affine group, Kaluza-Klein, Wong,
//!   damped oscillator) used as fixtures and from the command line.
//!
//! The crate is `no_std`-compatible (with `alloc`); the companion CLI crate
//! carries all IO and file formats.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod bundle;
pub mod contact;
pub mod error;
pub mod lie;
pub mod numerics;
pub mod reconstruction;
pub mod reduction;
pub mod rng;
pub mod scenarios;
pub mod trajectory;

pub use error::{CoreError, Result};
pub use numerics::{DenseMatrix, Dual2, OdeProblem};
pub use trajectory::Trajectory;

pub(crate) mod math {
    //! Scalar math shims: std intrinsics when available, libm otherwise.

    #[cfg(any(feature = "std", test))]
    mod imp {
        pub fn exp(x: f64) -> f64 {
            x.exp()
        }
        pub fn ln(x: f64) -> f64 {
            x.ln()
        }
        pub fn sin(x: f64) -> f64 {
            x.sin()
        }
        pub fn cos(x: f64) -> f64 {
            x.cos()
        }
        pub fn sqrt(x: f64) -> f64 {
            x.sqrt()
        }
        pub fn powf(x: f64, p: f64) -> f64 {
            x.powf(p)
        }
        pub fn powi(x: f64, n: i32) -> f64 {
            x.powi(n)
        }
        pub fn atan2(y: f64, x: f64) -> f64 {
            y.atan2(x)
        }
    }

    #[cfg(not(any(feature = "std", test)))]
    mod imp {
        pub fn exp(x: f64) -> f64 {
            libm::exp(x)
        }
        pub fn ln(x: f64) -> f64 {
            libm::log(x)
        }
        pub fn sin(x: f64) -> f64 {
            libm::sin(x)
        }
        pub fn cos(x: f64) -> f64 {
            libm::cos(x)
        }
        pub fn sqrt(x: f64) -> f64 {
            libm::sqrt(x)
        }
        pub fn powf(x: f64, p: f64) -> f64 {
            libm::pow(x, p)
        }
        pub fn powi(x: f64, n: i32) -> f64 {
            libm::pow(x, n as f64)
        }
        pub fn atan2(y: f64, x: f64) -> f64 {
            libm::atan2(y, x)
        }
    }

    pub use imp::*;
}
