//! Numerical laboratory for Alexandrov solutions of Monge–Ampère equations whose
//! measures carry singular parts on segments, polytope skeleta, crosses and
//! smooth hypersurfaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`convex`] – piecewise-linear convex functions, their exact Monge–Ampère
//!   atoms, Legendre transforms, sections and independent checks.
//! * [`barriers`] – the explicit radial barrier `W_n`, the obstacles and the
//!   comparison functions used to trap solutions, plus inequality-chain checks.
//! * [`obstacle`] – the discrete Perron construction (monotone lifting capped by
//!   an obstacle) and extraction of the singular density.
//! * [`ot`] – semi-discrete optimal transport from a convex polygon to a
//!   nonconvex shape, singular-set detection and displacement interpolation.
//! * [`check`] – named pass/fail comparisons shared by all reports.
//! * [`run`] – the batch pipeline behind the `malab` command line tool.

// Negated float comparisons reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod barriers;
pub mod check;
pub mod config;
pub mod convex;
mod error;
pub mod geom;
pub mod hull;
pub mod io;
pub mod linalg;
pub mod obstacle;
pub mod ot;
pub mod power;
pub mod report;
pub mod run;
pub mod svg;

pub use error::{Error, Result};
