//! Semi-discrete optimal transport from a uniform density on a convex polygon
//! to equal point masses sampled from a nonconvex shape: dual weights by
//! damped Newton, the Brenier potential, detection of its singular set and
//! displacement interpolation.

mod dual;
mod frames;
mod potential;
mod reference;
mod shape;
mod singular;
mod verify;

pub use dual::{solve_dual, DualOptions, DualSolution, DualStep};
pub use frames::{displacement_frames, InterpolationFrames};
pub use potential::{brenier_potential, potential_value};
pub use reference::{split_ball_reference, SplitBallValue};
pub use shape::{apply, radical_inverse, SampleSet, ShapeName, ShapeSpec};
pub use singular::{
    detect_singular_set, directed_distance, distance_to_graph, symmetry_distance, SingularEdge, SingularGraph, TAU,
};
pub use verify::{solve_ladder, split_ball_map_error, verify_ladder, Ladder, OtReport, TILING_TOL};
