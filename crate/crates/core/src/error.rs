//! Error type shared by all modules.

use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, CoreError>;

/// Errors raised by the numerical engine.
///
/// `SingularMatrix` from a Hessian solve is re-labelled at the call site as
/// `NonRegularLagrangianAtState` (full dynamics) or `NonGRegularAtState`
/// (reduced dynamics / connection), so callers can tell a bad linear system
/// from a genuine loss of regularity.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Operand dimensions do not match.
    DimensionMismatch { expected: usize, got: usize },
    /// A pivot fell below the tolerance `1e-12 * max|entry|`.
    SingularMatrix,
    /// A state component became NaN or infinite at time `t`.
    NonFiniteState { t: f64 },
    /// A scalar function was evaluated outside its domain (log of a
    /// non-positive number, division by zero, ...).
    DomainError(&'static str),
    /// A group element left the domain of the coordinate chart.
    ChartOutOfRange(&'static str),
    /// `g E_a g^-1` does not lie in the span of the basis matrices.
    BasisNotClosed { residual: f64 },
    /// The velocity Hessian of the Lagrangian is singular at this state.
    NonRegularLagrangianAtState,
    /// The vertical Hessian block `g_ab` is singular at this state.
    NonGRegularAtState,
    /// A scenario parameter violates a regularity requirement.
    InvalidParameter(&'static str),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Self::SingularMatrix => write!(f, "matrix is singular within pivot tolerance"),
            Self::NonFiniteState { t } => {
                write!(f, "state became non-finite at t = {t}")
            }
            Self::DomainError(what) => write!(f, "domain error: {what}"),
            Self::ChartOutOfRange(what) => write!(f, "group chart out of range: {what}"),
            Self::BasisNotClosed { residual } => {
                write!(f, "adjoint image leaves the basis span (residual {residual:e})")
            }
            Self::NonRegularLagrangianAtState => {
                write!(f, "Lagrangian is not regular at this state (singular velocity Hessian)")
            }
            Self::NonGRegularAtState => {
                write!(f, "Lagrangian is not G-regular at this state (singular vertical Hessian)")
            }
            Self::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for CoreError {}
