//! Trapezoid quadrature of the contour-integral moment formulas.
//!
//! Circles carry spectrally accurate trapezoid sums; node counts are
//! grown until successive values agree. All sums are accumulated with the
//! largest per-axis magnitude factored out so that moments at `t ≈ 40`
//! stay representable.

mod nested;
mod onesided;
mod twopoint;

pub use nested::{converge, log_rel_change, nested_sum, next_nodes, roundoff_floor, Converged, Cross, Factor, NestedSum, LEAF_BUDGET};
pub use onesided::{
    choose_plan, default_plan, nested_shift_integral, onesided_integral, onesided_moment_q, saddle_plan,
    she_moment_q, she_moment_with, she_plan, ContourPlan, PlanKind, MAX_K_NESTED, MAX_K_SHE, ONESIDED_TOL,
    SHE_TOL,
};
pub use twopoint::{
    cross_factor, direct_r2, first_moment_q, first_moment_with, saddle_radius, second_moment_q,
    second_moment_q_direct, split_integral, split_plan, two_point_integral, z2_poles, SplitPlan,
    FIRST_MOMENT_TOL, SECOND_MOMENT_TOL,
};
