//! Explicit radial barriers, obstacles and comparison functions, and numeric
//! checks of the inequalities that make them admissible.

mod admissibility;
mod barrier;
mod obstacle;
mod radial;

pub use admissibility::{
    admissibility_check, admissibility_check_chain, AdmissibilityReport, Chain, InequalityRecord,
};
pub use barrier::{
    dist_to_span, eval_barrier, fd_hessian, find_c_star, grid4, hessian_det_check, interaction_det_exact,
    BarrierSpec, CStarSearch, DetCheck, LinearForm, FD_STEP, SINGULAR_MARGIN,
};
pub use obstacle::{eval_obstacle, ExtReal, ObstacleSpec, TailProfile, TAIL_CAP};
pub use radial::{eval_w, growth_check, integrate, w_profile, w_slope, GrowthFit, QUAD_TOL};
