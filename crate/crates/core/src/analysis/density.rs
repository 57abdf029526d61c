//! Sample histograms along radius, k_z or polar angle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::Trajectory;
use crate::dcf::{DcfTable, Support};
use crate::error::{Error, Result};
use crate::vec3::{norm, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileAxis {
    /// Normalized ellipsoidal radius, 1 on the extent surface.
    Radius,
    /// k_z in cm^-1.
    Z,
    /// Polar angle in rad.
    Polar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub axis: ProfileAxis,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Sum of DCF weights per bin, when weights were supplied.
    pub weighted: Option<Vec<f64>>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Counts per unit volume of each normalized-radius shell.
    pub fn shell_density(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| c as f64 / (w[1].powi(3) - w[0].powi(3)))
            .collect()
    }
}

fn coordinate(axis: ProfileAxis, support: &Support, k: Vec3) -> f64 {
    match axis {
        ProfileAxis::Radius => support.normalized_radius(k),
        ProfileAxis::Z => k[2],
        ProfileAxis::Polar => {
            let r = norm(k);
            if r == 0.0 {
                0.0
            } else {
                (k[2] / r).clamp(-1.0, 1.0).acos()
            }
        }
    }
}

pub fn density_profile(traj: &Trajectory, dcf: Option<&DcfTable>, axis: ProfileAxis, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::invalid("need at least one bin"));
    }
    let support = Support::of(traj);
    let e = &traj.meta.spec.extent;
    let (lo, hi) = match axis {
        ProfileAxis::Radius => (0.0, 1.0),
        ProfileAxis::Z => (-e.k_z, e.k_z),
        ProfileAxis::Polar => (0.0, PI),
    };
    let edges: Vec<f64> = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    let mut weighted = dcf.map(|_| vec![0.0; bins]);
    let weights = dcf.map(|d| d.flat());
    for (s, k) in traj.points().enumerate() {
        let x = coordinate(axis, &support, k);
        let b = (((x - lo) / (hi - lo)) * bins as f64).floor();
        // samples on the far edge, and stack pole planes a hair beyond it,
        // fall in the last bin
        let b = (b.max(0.0) as usize).min(bins - 1);
        counts[b] += 1;
        if let (Some(w), Some(acc)) = (&weights, weighted.as_mut()) {
            acc[b] += w[s];
        }
    }
    Ok(Histogram {
        axis,
        edges,
        counts,
        weighted,
    })
}
