//! Mimetic finite differences for the time-dependent Maxwell system on
//! Delaunay-Voronoi dual meshes, with the equivalent mass-lumped finite
//! element system and block-factorization preconditioners for the implicit
//! Crank-Nicolson steps.

pub mod dual;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod mfd;
pub mod precond;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::Point3;
