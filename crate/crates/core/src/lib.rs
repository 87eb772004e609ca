//! Exact loop-algebra, differential-polynomial and zero-curvature tooling for
//! coupled nonlinear Schrödinger systems, with a split-step solver and
//! monodromy-based checks of the resulting conservation laws.

pub mod cnls_sim;
pub mod diffpoly;
pub mod lax_numeric;
pub mod linsolve;
pub mod loop_algebra;
pub mod props;
pub mod scalar;
pub mod zero_curvature;

pub use scalar::{Cq, Scalar, Symbol};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
