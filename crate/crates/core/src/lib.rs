//! Exact and viscous rarefaction waves of the two-dimensional Burgers
//! equation behind a curved initial discontinuity `y = phi(x)`.
//!
//! * [`geometry`]: admissible curves and the implicit functions `Z`, `G`.
//! * [`exactwave`]: the inviscid rarefaction wave and comparison utilities.
//! * [`transform`]: the coordinates `(xi, eta)` and coefficients `K, A, B`.
//! * [`profiles`]: the smooth ansatz `w` and the Hopf–Cole profile `v`.
//! * [`solver`]: explicit finite-difference solvers in both coordinates.
//! * [`analysis`]: discrete norms, decay fits and experiments.
//! * [`cli`]: the command-line harness behind the `burgers2d` binary.

// `!(a < b)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod exactwave;
pub mod geometry;
pub mod plot;
pub mod profiles;
pub mod quadrature;
pub mod roots;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use exactwave::{Region, RiemannData};
pub use geometry::{Curve, CurveKind};
pub use profiles::ViscousProfile;
pub use solver::{Field2D, Grid2D};
