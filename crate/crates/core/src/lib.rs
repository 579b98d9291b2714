//! Principal eigenvalues of `−Δ` under Dirichlet, Neumann and Robin
//! boundary conditions on intervals, balls and planar meshes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretize;
pub mod error;
pub mod exact1d;
pub mod geometry;
pub mod harness;
pub mod radial;
pub mod roots;
pub mod types;

pub use error::{Result, SpectraError};
pub use types::{BoundaryKind, BoundaryOperator, EigenEstimate, Eigenfunction, Method, Problem1D, TolerancePolicy};
