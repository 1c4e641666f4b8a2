//! Discrete Perron construction for the obstacle problems and extraction of
//! the singular density along the obstacle support.

mod density;
mod scenario;
mod solver;
mod verify;

pub use density::{extract_singular_density, DensityProfile, DensitySample, Junction};
pub use scenario::{build_problem, DiscreteProblem, Piece, ScenarioKind, ScenarioSpec, Support, BOUNDARY_OFFSET};
pub use solver::{solve, DiscreteSolution, IterationRecord, SolveOptions, SolverMode};
pub use verify::{
    section_ratio_ceiling, symmetry_defect, verify, SectionRatio, VerificationReport, OFF_SUPPORT_TOL, SANDWICH_TOL, SECTION_HEIGHTS,
    SYMMETRY_TOL, Thinness,
};
