//! Point spread function by direct nonuniform Fourier summation.

use matrixmultiply::{zgemm, CGemmOption};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::Trajectory;
use crate::dcf::DcfTable;
use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Default limit on `samples x voxels`.
pub const DEFAULT_PSF_BUDGET: f64 = 5e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// PSF sampled on a centered voxel grid; voxel `n / 2` sits at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PsfImage {
    pub shape: [usize; 3],
    /// cm.
    pub voxel: [f64; 3],
    /// Row-major `[x][y][z]`, normalized so the center is 1.
    pub values: Vec<Complex64>,
    /// Center value before normalization, the weight sum.
    pub dc: f64,
}

impl PsfImage {
    pub fn center(&self) -> [usize; 3] {
        self.shape.map(|n| n / 2)
    }

    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.values[self.offset(i, j, k)]
    }

    /// Position of voxel index `i` along `axis`, cm.
    pub fn coord(&self, axis: Axis, i: usize) -> f64 {
        let a = axis.index();
        (i as f64 - (self.shape[a] / 2) as f64) * self.voxel[a]
    }

    /// Magnitudes along `axis` through the center.
    pub fn profile(&self, axis: Axis) -> Vec<f64> {
        let c = self.center();
        (0..self.shape[axis.index()])
            .map(|t| {
                let mut p = c;
                p[axis.index()] = t;
                self.at(p[0], p[1], p[2]).norm()
            })
            .collect()
    }

    /// Magnitude plane through the center, normal to `axis`, as rows of the
    /// two remaining axes in x, y, z order.
    pub fn plane(&self, axis: Axis) -> Vec<Vec<f64>> {
        let c = self.center();
        let (a, b) = match axis {
            Axis::X => (1, 2),
            Axis::Y => (0, 2),
            Axis::Z => (0, 1),
        };
        (0..self.shape[a])
            .map(|u| {
                (0..self.shape[b])
                    .map(|v| {
                        let mut p = c;
                        p[a] = u;
                        p[b] = v;
                        self.at(p[0], p[1], p[2]).norm()
                    })
                    .collect()
            })
            .collect()
    }

    /// Full width at half maximum along `axis`, cm, from linear
    /// interpolation of the half-maximum crossings on either side.
    pub fn fwhm(&self, axis: Axis) -> Option<f64> {
        let p = self.profile(axis);
        let c = self.shape[axis.index()] / 2;
        let peak = p[c];
        let half = 0.5 * peak;
        let walk = |step: isize| -> Option<f64> {
            let mut i = c as isize;
            loop {
                let j = i + step;
                if j < 0 || j as usize >= p.len() {
                    return None;
                }
                let (a, b) = (p[i as usize], p[j as usize]);
                if b < half {
                    return Some((i - c as isize).abs() as f64 + (a - half) / (a - b));
                }
                i = j;
            }
        };
        Some((walk(1)? + walk(-1)?) * self.voxel[axis.index()])
    }

    /// Position and magnitude of the largest value on the `axis` profile at
    /// least `min_dist` cm from the center.
    pub fn peak_beyond(&self, axis: Axis, min_dist: f64) -> Option<(f64, f64)> {
        let p = self.profile(axis);
        (0..p.len())
            .map(|i| (self.coord(axis, i), p[i]))
            .filter(|(x, _)| x.abs() >= min_dist)
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Largest magnitude per radial bin among voxels within `half_angle_deg`
    /// of `axis` (both directions). Bin `b` covers `[b, b + 1) * bin` cm.
    pub fn sector_envelope(&self, axis: Axis, half_angle_deg: f64, bin: f64) -> Vec<f64> {
        let a = axis.index();
        let cos_min = half_angle_deg.to_radians().cos();
        let reach = (0..3)
            .map(|d| (self.shape[d] / 2) as f64 * self.voxel[d])
            .map(|h| h * h)
            .sum::<f64>()
            .sqrt();
        let mut env = vec![0.0f64; (reach / bin).ceil() as usize + 1];
        let axes = [Axis::X, Axis::Y, Axis::Z];
        for i in 0..self.shape[0] {
            let x = self.coord(axes[0], i);
            for j in 0..self.shape[1] {
                let y = self.coord(axes[1], j);
                for k in 0..self.shape[2] {
                    let z = self.coord(axes[2], k);
                    let r = (x * x + y * y + z * z).sqrt();
                    if r == 0.0 || [x, y, z][a].abs() < cos_min * r {
                        continue;
                    }
                    let b = ((r / bin) as usize).min(env.len() - 1);
                    env[b] = env[b].max(self.at(i, j, k).norm());
                }
            }
        }
        env
    }

    /// Radius, cm, at which the sector envelope around `axis` first reaches
    /// half of its largest value beyond `min_dist`. Marks where the first
    /// aliasing feature sets in along that direction.
    pub fn aliasing_onset(&self, axis: Axis, half_angle_deg: f64, min_dist: f64) -> Option<f64> {
        let bin = self.voxel[axis.index()];
        let env = self.sector_envelope(axis, half_angle_deg, bin);
        let first = (min_dist / bin).ceil() as usize;
        let tail = env.get(first..)?;
        let peak = tail.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            return None;
        }
        let b = tail.iter().position(|&v| v >= 0.5 * peak)?;
        Some((first + b) as f64 * bin + 0.5 * bin)
    }

    /// Largest magnitude away from the center voxel.
    pub fn max_off_center(&self) -> f64 {
        let c = self.center();
        let ci = self.offset(c[0], c[1], c[2]);
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != ci)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|Im| / |center|`.
    pub fn max_imaginary(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }
}

/// `sum_i w_i exp(+2 pi i k_i . x)` on a `shape` grid spanning `fov_render` cm.
pub fn compute_psf(traj: &Trajectory, dcf: &DcfTable, shape: [usize; 3], fov_render: [f64; 3]) -> Result<PsfImage> {
    compute_psf_with_budget(traj, dcf, shape, fov_render, DEFAULT_PSF_BUDGET)
}

pub fn compute_psf_with_budget(
    traj: &Trajectory,
    dcf: &DcfTable,
    shape: [usize; 3],
    fov_render: [f64; 3],
    budget: f64,
) -> Result<PsfImage> {
    if traj.readouts.len() != dcf.weights.len()
        || traj.readouts.iter().zip(&dcf.weights).any(|(r, w)| r.k_samples.len() != w.len())
    {
        return Err(Error::invalid("DCF table does not match the trajectory"));
    }
    let points: Vec<Vec3> = traj.points().collect();
    psf_of_points(&points, &dcf.flat(), shape, fov_render, budget)
}

pub fn psf_of_points(
    points: &[Vec3],
    weights: &[f64],
    shape: [usize; 3],
    fov_render: [f64; 3],
    budget: f64,
) -> Result<PsfImage> {
    if points.len() != weights.len() || points.is_empty() {
        return Err(Error::invalid("need one weight per sample"));
    }
    if shape.contains(&0) || fov_render.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("grid shape and render FOV must be positive"));
    }
    let voxels = (shape[0] * shape[1] * shape[2]) as f64;
    let ops = voxels * points.len() as f64;
    if ops > budget {
        let factor = (ops / budget).cbrt().ceil();
        return Err(Error::Budget {
            what: "PSF samples x voxels".into(),
            requested: ops,
            limit: budget,
            hint: format!("reduce each grid dimension by a factor of about {factor}"),
        });
    }
    let voxel = [0, 1, 2].map(|a| fov_render[a] / shape[a] as f64);
    let ns = points.len();
    // phase[a][i * ns + s] = exp(2 pi i k_s[a] x_i)
    let phase: Vec<Vec<Complex64>> = (0..3)
        .map(|a| {
            let mut out = vec![Complex64::new(0.0, 0.0); shape[a] * ns];
            out.par_chunks_mut(ns).enumerate().for_each(|(i, row)| {
                let x = (i as f64 - (shape[a] / 2) as f64) * voxel[a];
                for (s, v) in row.iter_mut().enumerate() {
                    let (sn, cs) = (2.0 * std::f64::consts::PI * points[s][a] * x).sin_cos();
                    *v = Complex64::new(cs, sn);
                }
            });
            out
        })
        .collect();
    let (nx, ny, nz) = (shape[0], shape[1], shape[2]);
    let mut values = vec![Complex64::new(0.0, 0.0); nx * ny * nz];
    values.par_chunks_mut(ny * nz).enumerate().for_each(|(i, slab)| {
        // A[j][s] = w_s ex_s(i) ey_s(j)
        let ex = &phase[0][i * ns..(i + 1) * ns];
        let mut a = vec![Complex64::new(0.0, 0.0); ny * ns];
        for j in 0..ny {
            let ey = &phase[1][j * ns..(j + 1) * ns];
            let row = &mut a[j * ns..(j + 1) * ns];
            for s in 0..ns {
                row[s] = ex[s] * ey[s] * weights[s];
            }
        }
        // B[s][l] = ez_s(l), read from the [l][s] table with swapped strides
        let b = &phase[2];
        // SAFETY: Complex64 is repr(C) { re, im }, the layout of [f64; 2];
        // the strides below address ny x ns, ns x nz and ny x nz blocks that
        // lie inside the three buffers.
        unsafe {
            zgemm(
                CGemmOption::Standard,
                CGemmOption::Standard,
                ny,
                ns,
                nz,
                [1.0, 0.0],
                a.as_ptr() as *const [f64; 2],
                ns as isize,
                1,
                b.as_ptr() as *const [f64; 2],
                1,
                ns as isize,
                [0.0, 0.0],
                slab.as_mut_ptr() as *mut [f64; 2],
                nz as isize,
                1,
            );
        }
    });
    let c = [nx / 2, ny / 2, nz / 2];
    let center = values[(c[0] * ny + c[1]) * nz + c[2]];
    let dc: f64 = weights.iter().sum();
    if !(center.norm() > 0.0) {
        return Err(Error::invalid("PSF center vanishes; weights sum to zero"));
    }
    let inv = 1.0 / center;
    values.iter_mut().for_each(|v| *v *= inv);
    Ok(PsfImage {
        shape,
        voxel,
        values,
        dc,
    })
}
