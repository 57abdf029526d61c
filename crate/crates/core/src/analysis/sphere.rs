//! Uniformity of point sets on the unit sphere from Monte-Carlo Voronoi areas.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::PointGrid;
use crate::vec3::{norm, scale, Vec3};

pub const DEFAULT_CAP_DEG: f64 = 5.0;
const BATCH: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaStats {
    pub count: usize,
    pub mean: f64,
    /// Standard deviation over mean.
    pub cv: f64,
    pub min: f64,
    pub max: f64,
}

impl AreaStats {
    pub fn of(areas: &[f64]) -> Self {
        let n = areas.len() as f64;
        let mean = areas.iter().sum::<f64>() / n;
        let var = areas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        Self {
            count: areas.len(),
            mean,
            cv: var.sqrt() / mean,
            min: areas.iter().cloned().fold(f64::INFINITY, f64::min),
            max: areas.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityStats {
    pub all: AreaStats,
    /// Points with polar angle in `[cap_deg, 180 - cap_deg]`.
    pub excluding_caps: AreaStats,
    pub cap_deg: f64,
    /// Estimated area of every point, steradians.
    pub areas: Vec<f64>,
}

/// Monte-Carlo spherical Voronoi areas of unit vectors, steradians.
fn mc_areas(unit: &[Vec3], mc_points: usize, seed: u64) -> Vec<f64> {
    let grid = PointGrid::new(unit.to_vec(), [-1.0; 3], [1.0; 3], 1.0);
    let batches = mc_points.div_ceil(BATCH);
    let counts = (0..batches)
        .into_par_iter()
        .fold(
            || vec![0u64; unit.len()],
            |mut acc, b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                for _ in 0..BATCH.min(mc_points - b * BATCH) {
                    let z: f64 = rng.random_range(-1.0..=1.0);
                    let a: f64 = rng.random_range(0.0..2.0 * PI);
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    acc[grid.nearest([s * a.cos(), s * a.sin(), z])] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; unit.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    counts.iter().map(|&c| 4.0 * PI * c as f64 / mc_points as f64).collect()
}

pub fn sphere_uniformity(points: &[Vec3], mc_points: usize, seed: u64) -> Result<UniformityStats> {
    sphere_uniformity_with(points, mc_points, seed, DEFAULT_CAP_DEG)
}

pub fn sphere_uniformity_with(points: &[Vec3], mc_points: usize, seed: u64, cap_deg: f64) -> Result<UniformityStats> {
    if points.len() < 10 {
        return Err(Error::invalid(format!("need at least 10 points (got {})", points.len())));
    }
    if mc_points == 0 {
        return Err(Error::invalid("need at least one Monte-Carlo point"));
    }
    let unit: Vec<Vec3> = points
        .iter()
        .map(|&p| {
            let r = norm(p);
            if r > 0.0 {
                Ok(scale(p, 1.0 / r))
            } else {
                Err(Error::invalid("zero vector in point set"))
            }
        })
        .collect::<Result<_>>()?;
    let areas = mc_areas(&unit, mc_points, seed);
    let cap = cap_deg.to_radians();
    let kept: Vec<f64> = unit
        .iter()
        .zip(&areas)
        .filter(|(p, _)| {
            let polar = p[2].clamp(-1.0, 1.0).acos();
            polar >= cap && polar <= PI - cap
        })
        .map(|(_, &a)| a)
        .collect();
    if kept.is_empty() {
        return Err(Error::invalid("every point lies inside the polar caps"));
    }
    Ok(UniformityStats {
        all: AreaStats::of(&areas),
        excluding_caps: AreaStats::of(&kept),
        cap_deg,
        areas,
    })
}
