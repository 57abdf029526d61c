//! Design of 3D non-Cartesian k-space trajectories for anisotropic fields of
//! view: radial, twisted cones and spherical stacks of spirals.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod error;
pub mod dcf;
pub mod geometry;
pub mod io;
mod nn;
pub mod numerics;
pub mod paths;
pub mod pipeline;
pub mod templates;
pub mod vec3;

pub use error::{Error, Result};
