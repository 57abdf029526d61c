//! Density compensation: closed-form Jacobian weights for the three
//! trajectory kinds and a Monte-Carlo Voronoi oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::Trajectory;
use crate::error::{Error, Result};
use crate::geometry::{extent_at, orthogonal_fov, vd_fov_z};
use crate::nn::PointGrid;
use crate::paths::{PathKind, SpiralPath};
use crate::vec3::{norm, Vec3};

/// Per-sample weights, normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcfTable {
    /// `weights[readout][sample]`.
    pub weights: Vec<Vec<f64>>,
    /// Factor that was applied to the raw weights.
    pub normalization: f64,
}

impl DcfTable {
    /// Normalizes raw weights to unit sum.
    pub fn from_raw(mut weights: Vec<Vec<f64>>) -> Result<Self> {
        let total: f64 = weights.iter().flatten().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::invalid(format!("weights sum to {total}")));
        }
        let s = 1.0 / total;
        weights.iter_mut().flatten().for_each(|w| *w *= s);
        Ok(Self {
            weights,
            normalization: s,
        })
    }

    pub fn flat(&self) -> Vec<f64> {
        self.weights.iter().flatten().copied().collect()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().flatten().sum()
    }

    pub fn len(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_kind(traj: &Trajectory, path: &SpiralPath, want: PathKind) -> Result<()> {
    for found in [traj.kind, path.kind] {
        if found != want {
            return Err(Error::KindMismatch {
                expected: want.to_string(),
                found: found.to_string(),
            });
        }
    }
    Ok(())
}

fn per_readout(traj: &Trajectory, f: impl Fn(usize, f64) -> Vec<f64> + Sync) -> Result<DcfTable> {
    let raw: Vec<Vec<f64>> = traj
        .readouts
        .par_iter()
        .map(|r| f(r.template, r.second))
        .collect();
    DcfTable::from_raw(raw)
}

/// `|k| |g . k| / (K^2(phi) L_90(phi))`.
pub fn radial_dcf(traj: &Trajectory, path: &SpiralPath) -> Result<DcfTable> {
    check_kind(traj, path, PathKind::Radial)?;
    let (fm, e) = (path.fov, path.extent);
    let base: Vec<Vec<f64>> = traj
        .templates
        .iter()
        .map(|t| {
            t.radial_dot()
                .iter()
                .zip(&t.k_samples)
                .map(|(gk, &k)| norm(k) * gk.abs())
                .collect()
        })
        .collect();
    per_readout(traj, |ti, phi| {
        let c = 1.0 / (extent_at(&e, phi).powi(2) * orthogonal_fov(&fm, phi));
        base[ti].iter().map(|w| w * c).collect()
    })
}

/// `|k| |g . k| sin(phi) / (K(phi) n(phi) L_90(phi))`.
pub fn cones_dcf(traj: &Trajectory, path: &SpiralPath) -> Result<DcfTable> {
    check_kind(traj, path, PathKind::Cones)?;
    let (fm, e) = (path.fov, path.extent);
    let base: Vec<Vec<f64>> = traj
        .templates
        .iter()
        .map(|t| {
            t.radial_dot()
                .iter()
                .zip(&t.k_samples)
                .map(|(gk, &k)| norm(k) * gk.abs())
                .collect()
        })
        .collect();
    per_readout(traj, |ti, phi| {
        let c = phi.sin() / (extent_at(&e, phi) * path.interleaves_at(phi) * orthogonal_fov(&fm, phi));
        base[ti].iter().map(|w| w * c.abs()).collect()
    })
}

/// `|g_r . k_r| / (n(z) L_z(z))`.
pub fn stack_dcf(traj: &Trajectory, path: &SpiralPath) -> Result<DcfTable> {
    check_kind(traj, path, PathKind::Stack)?;
    let (fm, e, d) = (path.fov, path.extent, path.density);
    let base: Vec<Vec<f64>> = traj
        .templates
        .iter()
        .map(|t| t.inplane_dot().iter().map(|v| v.abs()).collect())
        .collect();
    per_readout(traj, |ti, z| {
        let c = 1.0 / (path.interleaves_at(z) * vd_fov_z(&fm, &d, z, e.k_z));
        base[ti].iter().map(|w| w * c).collect()
    })
}

/// The analytic weights matching the trajectory kind.
pub fn analytic_dcf(traj: &Trajectory, path: &SpiralPath) -> Result<DcfTable> {
    match traj.kind {
        PathKind::Radial => radial_dcf(traj, path),
        PathKind::Cones => cones_dcf(traj, path),
        PathKind::Stack => stack_dcf(traj, path),
    }
}

pub const ORACLE_MAX_SAMPLES: usize = 200_000;
pub const ORACLE_MIN_POINTS_PER_SAMPLE: usize = 100;
const ORACLE_BATCH: usize = 1 << 16;

/// Region Monte-Carlo points are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// `(k_r / a_r)^2 + (k_z / a_z)^2 <= 1`.
    Ellipsoid { a_r: f64, a_z: f64 },
    /// `k_r <= a_r`, `|k_z| <= a_z`.
    Cylinder { a_r: f64, a_z: f64 },
}

impl Support {
    /// Support of a trajectory: the extent ellipsoid, or the cylinder for a
    /// stack whose planes keep the full in-plane extent.
    pub fn of(traj: &Trajectory) -> Self {
        let s = &traj.meta.spec;
        let (a_r, a_z) = (s.extent.k_r, s.extent.k_z);
        match (traj.kind, s.rule) {
            (PathKind::Stack, crate::geometry::ResolutionRule::Literal) => Support::Cylinder { a_r, a_z },
            _ => Support::Ellipsoid { a_r, a_z },
        }
    }

    fn half_box(&self) -> Vec3 {
        match *self {
            Support::Ellipsoid { a_r, a_z } | Support::Cylinder { a_r, a_z } => [a_r, a_r, a_z],
        }
    }

    pub fn contains(&self, k: Vec3) -> bool {
        match *self {
            Support::Ellipsoid { a_r, a_z } => (k[0] / a_r).powi(2) + (k[1] / a_r).powi(2) + (k[2] / a_z).powi(2) <= 1.0,
            Support::Cylinder { a_r, a_z } => k[0].hypot(k[1]) <= a_r && k[2].abs() <= a_z,
        }
    }

    /// Normalized radius: 1 on the ellipsoid surface.
    pub fn normalized_radius(&self, k: Vec3) -> f64 {
        let (Support::Ellipsoid { a_r, a_z } | Support::Cylinder { a_r, a_z }) = *self;
        ((k[0] / a_r).powi(2) + (k[1] / a_r).powi(2) + (k[2] / a_z).powi(2)).sqrt()
    }
}

/// Voronoi volumes estimated by nearest-sample counts of uniform points.
pub fn voronoi_dcf_oracle(traj: &Trajectory, mc_points: usize, seed: u64) -> Result<DcfTable> {
    voronoi_dcf_oracle_in(traj, Support::of(traj), mc_points, seed)
}

pub fn voronoi_dcf_oracle_in(traj: &Trajectory, support: Support, mc_points: usize, seed: u64) -> Result<DcfTable> {
    let pts: Vec<Vec3> = traj.points().collect();
    let counts = voronoi_counts(&pts, support, mc_points, seed)?;
    let mut it = counts.into_iter();
    let raw = traj
        .readouts
        .iter()
        .map(|r| it.by_ref().take(r.k_samples.len()).map(|c| c as f64).collect())
        .collect();
    DcfTable::from_raw(raw)
}

/// Number of uniform points in `support` closest to each of `pts`.
pub fn voronoi_counts(pts: &[Vec3], support: Support, mc_points: usize, seed: u64) -> Result<Vec<u64>> {
    let n = pts.len();
    if n == 0 {
        return Err(Error::invalid("no samples"));
    }
    if n > ORACLE_MAX_SAMPLES {
        return Err(Error::Budget {
            what: "Voronoi oracle sample count".into(),
            requested: n as f64,
            limit: ORACLE_MAX_SAMPLES as f64,
            hint: "use a coarser raster or fewer readouts".into(),
        });
    }
    let need = ORACLE_MIN_POINTS_PER_SAMPLE * n;
    if mc_points < need {
        return Err(Error::Budget {
            what: "Monte-Carlo point floor".into(),
            requested: need as f64,
            limit: mc_points as f64,
            hint: format!("pass at least {need} Monte-Carlo points"),
        });
    }
    let h = support.half_box();
    let grid = PointGrid::new(pts.to_vec(), h.map(|v| -v), h, 2.0);
    let batches = mc_points.div_ceil(ORACLE_BATCH);
    let counts = (0..batches)
        .into_par_iter()
        .fold(
            || vec![0u64; grid.len()],
            |mut acc, b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let todo = ORACLE_BATCH.min(mc_points - b * ORACLE_BATCH);
                let mut done = 0;
                while done < todo {
                    let q = [
                        rng.random_range(-h[0]..=h[0]),
                        rng.random_range(-h[1]..=h[1]),
                        rng.random_range(-h[2]..=h[2]),
                    ];
                    if !support.contains(q) {
                        continue;
                    }
                    acc[grid.nearest(q)] += 1;
                    done += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; grid.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

/// `||a - o|| / ||o||` over `mask`, after normalizing both to unit sum
/// over the masked entries.
pub fn relative_rms(analytic: &[f64], oracle: &[f64], mask: &[bool]) -> f64 {
    let sa: f64 = analytic.iter().zip(mask).filter(|(_, m)| **m).map(|(a, _)| a).sum();
    let so: f64 = oracle.iter().zip(mask).filter(|(_, m)| **m).map(|(o, _)| o).sum();
    let (mut num, mut den) = (0.0, 0.0);
    for ((a, o), m) in analytic.iter().zip(oracle).zip(mask) {
        if *m {
            let (a, o) = (a / sa, o / so);
            num += (a - o) * (a - o);
            den += o * o;
        }
    }
    (num / den).sqrt()
}

/// Samples whose normalized radius lies in `[lo, hi]`.
pub fn radius_mask(traj: &Trajectory, lo: f64, hi: f64) -> Vec<bool> {
    let s = Support::of(traj);
    traj.points()
        .map(|k| {
            let r = s.normalized_radius(k);
            r >= lo && r <= hi
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{synthesize, TemplatePolicy, TemplateSpec};
    use crate::geometry::{DensityParams, ExtentModel, FovModel, ResolutionRule};
    use crate::numerics::SampledFunction;
    use crate::paths::{design_radial_path, design_stack_path, discretize};
    use crate::templates::HardwareConfig;

    fn iso_radial() -> (Trajectory, SpiralPath) {
        let fm = FovModel::isotropic(10.0).unwrap();
        let e = ExtentModel::isotropic(1.25).unwrap();
        let path = design_radial_path(&fm, &e).unwrap();
        let d = discretize(&path, 0.5).unwrap();
        let spec = TemplateSpec {
            kind: PathKind::Radial,
            fov: fm,
            extent: e,
            density: DensityParams::default(),
            hardware: HardwareConfig::clinical(5.0).unwrap(),
            rule: ResolutionRule::Coarsen,
            policy: TemplatePolicy::PerReadout,
        };
        (synthesize(&d, &path, &spec).unwrap(), path)
    }

    #[test]
    fn radial_weights_vanish_at_origin_and_match_across_spokes() {
        let (traj, path) = iso_radial();
        let w = radial_dcf(&traj, &path).unwrap();
        assert!((w.total() - 1.0).abs() < 1e-12);
        for r in &w.weights {
            assert_eq!(r[0], 0.0);
            for (a, b) in r.iter().zip(&w.weights[0]) {
                assert!((a - b).abs() <= 1e-12 * b);
            }
        }
    }

    #[test]
    fn radial_weights_grow_as_k_squared_on_plateau() {
        // long spoke with a gradient plateau
        let fm = FovModel::isotropic(10.0).unwrap();
        let e = ExtentModel::isotropic(6.0).unwrap();
        let path = design_radial_path(&fm, &e).unwrap();
        let d = discretize(&path, 0.5).unwrap();
        let spec = TemplateSpec {
            kind: PathKind::Radial,
            fov: fm,
            extent: e,
            density: DensityParams::default(),
            hardware: HardwareConfig::clinical(5.0).unwrap(),
            rule: ResolutionRule::Coarsen,
            policy: TemplatePolicy::PerReadout,
        };
        let traj = synthesize(&d, &path, &spec).unwrap();
        let w = radial_dcf(&traj, &path).unwrap();
        let t = &traj.templates[0];
        let g_max = t.max_amplitude();
        let plateau: Vec<usize> = (1..t.len() - 1)
            .filter(|&i| (norm(t.gradient_at(i)) - g_max).abs() < 1e-6 * g_max)
            .collect();
        assert!(plateau.len() > 10);
        let (i, j) = (plateau[0], *plateau.last().unwrap());
        let ratio = w.weights[0][j] / w.weights[0][i];
        let want = (norm(t.k_samples[j]) / norm(t.k_samples[i])).powi(2);
        assert!((ratio / want - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stack_weights_are_plane_independent_for_constant_counts() {
        let fm = FovModel::new(20.0, 4.0).unwrap();
        let e = ExtentModel::from_resolution(0.5, 0.5).unwrap();
        let dp = DensityParams::default();
        let n = SampledFunction::from_fn(-e.k_z, e.k_z, 5, |_| 4.0).unwrap();
        let path = design_stack_path(&fm, &e, &dp, &n).unwrap();
        let d = discretize(&path, 0.5).unwrap();
        let spec = TemplateSpec {
            kind: PathKind::Stack,
            fov: fm,
            extent: e,
            density: dp,
            hardware: HardwareConfig::clinical(8.0).unwrap(),
            rule: ResolutionRule::Literal,
            policy: TemplatePolicy::PerReadout,
        };
        let traj = synthesize(&d, &path, &spec).unwrap();
        let w = stack_dcf(&traj, &path).unwrap();
        for r in &w.weights {
            assert_eq!(r[0], 0.0);
            for (a, b) in r.iter().zip(&w.weights[0]) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
            }
        }
        assert!(matches!(radial_dcf(&traj, &path), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn oracle_symmetric_pair() {
        let pts = [[0.0, 0.0, 0.5], [0.0, 0.0, -0.5]];
        let c = voronoi_counts(&pts, Support::Ellipsoid { a_r: 1.0, a_z: 1.0 }, 200_000, 1).unwrap();
        let (a, b) = (c[0] as f64, c[1] as f64);
        assert_eq!(a + b, 200_000.0);
        assert!((a / b - 1.0).abs() < 0.02);
    }

    #[test]
    fn oracle_uniform_grid_cells_are_equal() {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    pts.push([i as f64 * 0.2 - 0.9, j as f64 * 0.2 - 0.9, k as f64 * 0.2 - 0.9]);
                }
            }
        }
        let s = Support::Cylinder { a_r: 10.0, a_z: 1.0 };
        // a cube support, via a huge cylinder clipped by the box draw
        let c = voronoi_counts_box(&pts, 1.0, 1_000_000, 7);
        let interior: Vec<f64> = pts
            .iter()
            .zip(&c)
            .filter(|(p, _)| p.iter().all(|v| v.abs() < 0.8))
            .map(|(_, &n)| n as f64)
            .collect();
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        let var = interior.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / interior.len() as f64;
        assert!(var.sqrt() / mean < 0.05);
        assert!(voronoi_counts(&pts, s, 10, 1).is_err());
    }

    fn voronoi_counts_box(pts: &[Vec3], h: f64, n: usize, seed: u64) -> Vec<u64> {
        let grid = PointGrid::new(pts.to_vec(), [-h; 3], [h; 3], 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = vec![0u64; pts.len()];
        for _ in 0..n {
            let q = [rng.random_range(-h..h), rng.random_range(-h..h), rng.random_range(-h..h)];
            c[grid.nearest(q)] += 1;
        }
        c
    }

    #[test]
    fn oracle_is_deterministic() {
        let pts: Vec<Vec3> = (0..50).map(|i| [0.01 * i as f64, 0.0, 0.0]).collect();
        let s = Support::Ellipsoid { a_r: 1.0, a_z: 1.0 };
        assert_eq!(voronoi_counts(&pts, s, 100_000, 5).unwrap(), voronoi_counts(&pts, s, 100_000, 5).unwrap());
    }

    #[test]
    fn relative_rms_is_scale_free() {
        let a = [1.0, 2.0, 3.0];
        let o = [2.0, 4.0, 6.0];
        assert!(relative_rms(&a, &o, &[true; 3]) < 1e-15);
    }
}
