//! Piecewise-linear convex functions in two and three dimensions and their
//! exact Monge–Ampère measures.

mod cloud;
mod flat;
mod function;
mod legendre;
mod measure;
mod oracle;
mod sampling;
mod section;

pub use cloud::{Domain, NodeTag, Point, PointCloud};
pub use flat::{flat_set_probe, FlatPiece};
pub use function::{lower_convex_envelope, Facet, PLConvexFunction, HULL_TOL};
pub use legendre::legendre_transform;
pub use measure::{ma_atoms, ma_measure, measure_from_atoms, MaAtomTable, Region};
pub use oracle::{subgradient_oracle, DUALITY_TOL};
pub use sampling::{disk_lattice, sample};
pub use section::{section, Section};
