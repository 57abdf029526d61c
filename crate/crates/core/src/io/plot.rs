//! Plot data as plain JSON records; rendering is left to other tools.

use serde::{Deserialize, Serialize};

use crate::analysis::{Axis, PsfImage};
use crate::paths::SpiralPath;

/// `theta_p(u)`, the second coordinate and the `g` denominator sampled on a
/// uniform `u` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCurves {
    pub kind: String,
    pub n_real: f64,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
    pub second: Vec<f64>,
    pub g: Vec<f64>,
}

impl PathCurves {
    pub fn of(path: &SpiralPath, points: usize) -> Self {
        let n = points.max(2);
        let u: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        Self {
            kind: path.kind.name().into(),
            n_real: path.n_real,
            theta: u.iter().map(|&t| path.theta_p(t)).collect(),
            second: u.iter().map(|&t| path.second_coord(t)).collect(),
            g: u.iter().map(|&t| path.g_denominator(t)).collect(),
            u,
        }
    }
}

/// A magnitude plane through the PSF center, flattened row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneData {
    /// Axis normal to the plane.
    pub normal: Axis,
    /// Axes along rows and columns.
    pub axes: [Axis; 2],
    pub shape: [usize; 2],
    /// cm.
    pub spacing: [f64; 2],
    /// Coordinates of the first row and column, cm.
    pub origin: [f64; 2],
    pub values: Vec<f64>,
}

impl PlaneData {
    pub fn of(psf: &PsfImage, normal: Axis) -> Self {
        let axes = match normal {
            Axis::X => [Axis::Y, Axis::Z],
            Axis::Y => [Axis::X, Axis::Z],
            Axis::Z => [Axis::X, Axis::Y],
        };
        let idx = |a: Axis| match a {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        };
        let rows = psf.plane(normal);
        Self {
            normal,
            axes,
            shape: [psf.shape[idx(axes[0])], psf.shape[idx(axes[1])]],
            spacing: [psf.voxel[idx(axes[0])], psf.voxel[idx(axes[1])]],
            origin: [psf.coord(axes[0], 0), psf.coord(axes[1], 0)],
            values: rows.into_iter().flatten().collect(),
        }
    }
}

/// Center profile along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileData {
    pub axis: Axis,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl ProfileData {
    pub fn of(psf: &PsfImage, axis: Axis) -> Self {
        let values = psf.profile(axis);
        Self {
            axis,
            x: (0..values.len()).map(|i| psf.coord(axis, i)).collect(),
            values,
        }
    }
}
