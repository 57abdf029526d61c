//! Verification instruments: PSF by direct summation, spherical uniformity
//! and sample density profiles.

mod density;
mod psf;
mod sphere;

pub use density::{density_profile, Histogram, ProfileAxis};
pub use psf::{compute_psf, compute_psf_with_budget, psf_of_points, Axis, PsfImage, DEFAULT_PSF_BUDGET};
pub use sphere::{sphere_uniformity, sphere_uniformity_with, AreaStats, UniformityStats, DEFAULT_CAP_DEG};
