//! Moments and Lyapunov exponents of the nearest-neighbour parabolic
//! Anderson model `dZ(t,n) = ½ΔZ(t,n) dt + β Z(t,n) dW_n(t)` on ℤ with
//! delta initial data.
//!
//! Every quantity is available through several independent routes so that
//! each one can be checked against the others:
//!
//! * [`quadrature`] evaluates the nested contour-integral moment formulas,
//! * [`oracle`] integrates the truncated moment ODE systems directly,
//! * [`expansion`] rewrites the nested integral as a sum over partitions,
//! * [`montecarlo`] simulates the lattice SDE and the pinned random walk,
//! * [`lyapunov`] computes the exponents in closed form or by convex root
//!   solves and fits growth rates of the finite-time moments.

pub mod error;
pub mod expansion;
pub mod lyapunov;
pub mod mathcore;
pub mod montecarlo;
pub mod oracle;
pub mod quadrature;

pub use error::{PamError, Result};
pub use mathcore::{
    Contour, ContourKind, LogComplex, ModelParams, MomentResult, OrderedPair, OrderedTuple,
    Partition, Route,
};
