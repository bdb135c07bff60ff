//! Spectral laboratory for Hill and one-dimensional Dirac operators with
//! trigonometric-polynomial potentials.

pub mod asymptotics;
pub mod dd;
pub mod galerkin;
pub mod linalg;
pub mod logc;
pub mod model;
pub mod monodromy;
pub mod parse;
pub mod triangles;
pub mod verify;
