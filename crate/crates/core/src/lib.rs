//! High-order hybridizable discontinuous Galerkin solver for incompressible
//! miscible displacement on structured quadrilateral meshes.

pub mod basis;
pub mod error;
pub mod hdg;
pub mod linalg;
pub mod mesh;
pub mod physics;
pub mod simulation;
pub mod verification;

pub use error::{Error, Phase, Result};
