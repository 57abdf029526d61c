//! Rotation of templates into the full trajectory along a discretized path.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{extent_at, DensityParams, ExtentModel, FovModel, ResolutionRule, StackGeometry};
use crate::paths::{DiscretizedPath, PathKind, SpiralPath};
use crate::templates::{
    design_cone_template_with, design_radial_spoke_with, design_spiral_template_with,
    estimate_cone_interleaves_with, estimate_spiral_interleaves_with, HardwareConfig,
    ProfileOptions, SurfaceLabel, Template,
};
use crate::vec3::{apply, mat_mul, norm, rot_y, rot_z, Mat3, Vec3};

/// Which surface each readout's template is designed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum TemplatePolicy {
    /// One template per distinct readout surface.
    #[default]
    PerReadout,
    /// Templates on `surfaces` uniform surfaces; readouts use the nearest.
    Grid { surfaces: usize },
}

/// Everything needed to design the templates of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemplateSpec {
    pub kind: PathKind,
    pub fov: FovModel,
    pub extent: ExtentModel,
    pub density: DensityParams,
    pub hardware: HardwareConfig,
    pub rule: ResolutionRule,
    pub policy: TemplatePolicy,
}

impl TemplateSpec {
    pub fn stack_geometry(&self) -> StackGeometry {
        StackGeometry::new(&self.fov, &self.extent, self.rule)
    }

    fn snap(&self, f: f64) -> f64 {
        match self.policy {
            TemplatePolicy::PerReadout => f,
            TemplatePolicy::Grid { surfaces } => {
                let (a, b) = match self.kind {
                    PathKind::Stack => (-self.extent.k_z, self.extent.k_z),
                    _ => (0.0, PI),
                };
                let m = surfaces.max(2) - 1;
                let h = (b - a) / m as f64;
                a + ((f - a) / h).round().clamp(0.0, m as f64) * h
            }
        }
    }
}

/// One acquired readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    pub index: usize,
    /// Index into [`Trajectory::templates`].
    pub template: usize,
    pub theta: f64,
    /// Polar angle (radial, cones) or plane height (stack) of the path sample.
    pub second: f64,
    pub k_samples: Vec<Vec3>,
}

/// Design parameters carried with a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub spec: TemplateSpec,
    pub n_real: f64,
    pub count: usize,
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: PathKind,
    pub readouts: Vec<Readout>,
    pub templates: Vec<Template>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn sample_count(&self) -> usize {
        self.readouts.iter().map(|r| r.k_samples.len()).sum()
    }

    pub fn samples_per_readout(&self) -> usize {
        self.readouts.iter().map(|r| r.k_samples.len()).max().unwrap_or(0)
    }

    pub fn template_of(&self, r: &Readout) -> &Template {
        &self.templates[r.template]
    }

    /// All samples, readout by readout.
    pub fn points(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.readouts.iter().flat_map(|r| r.k_samples.iter().copied())
    }

    /// Whether `k` lies in the design support: the extent ellipsoid for
    /// radial and cones, the `K_r x K_z` cylinder for the stack.
    pub fn in_support(&self, k: Vec3, slack: f64) -> bool {
        let e = &self.meta.spec.extent;
        let kr = k[0].hypot(k[1]);
        match self.kind {
            PathKind::Stack => kr <= e.k_r + slack && k[2].abs() <= e.k_z + slack,
            _ => {
                let r = norm(k);
                if r == 0.0 {
                    return true;
                }
                let phi = (k[2] / r).clamp(-1.0, 1.0).acos();
                r <= extent_at(e, phi) + slack
            }
        }
    }

    /// Largest distance a raster step covers: `gamma_bar g_max dt`.
    pub fn raster_cell(&self) -> f64 {
        let hw = &self.meta.spec.hardware;
        hw.k_rate() * hw.g_max * hw.dt
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Key(u64);

fn key(v: f64) -> Key {
    Key(v.to_bits())
}

fn spoke_reach(e: &ExtentModel, phi: f64) -> f64 {
    if e.k_r == e.k_z {
        e.k_r
    } else {
        extent_at(e, phi)
    }
}

fn design_one(spec: &TemplateSpec, label: f64, n_hint: f64, opts: &ProfileOptions) -> Result<Template> {
    let (fm, e, d, hw) = (&spec.fov, &spec.extent, &spec.density, &spec.hardware);
    match spec.kind {
        PathKind::Radial => {
            let reach = ExtentModel::isotropic(spoke_reach(e, label))?;
            let mut t = design_radial_spoke_with(&reach, hw, 0.0, opts)?;
            t.surface = SurfaceLabel::Polar(label);
            Ok(t)
        }
        PathKind::Cones => {
            let n = (n_hint.ceil().max(1.0)) as u32;
            match design_cone_template_with(fm, e, d, hw, label, n, opts) {
                Err(Error::Infeasible { .. }) => {
                    let m = estimate_cone_interleaves_with(fm, e, d, hw, label, opts)?;
                    design_cone_template_with(fm, e, d, hw, label, m.max(n), opts)
                }
                r => r,
            }
        }
        PathKind::Stack => {
            let stack = spec.stack_geometry();
            let n = (n_hint.ceil().max(1.0)) as u32;
            match design_spiral_template_with(fm, &stack, d, hw, label, n, opts) {
                Err(Error::Infeasible { .. }) => {
                    let m = estimate_spiral_interleaves_with(fm, &stack, d, hw, label, opts)?;
                    design_spiral_template_with(fm, &stack, d, hw, label, m.max(n), opts)
                }
                r => r,
            }
        }
    }
}

fn rotation(kind: PathKind, theta: f64, second: f64) -> Mat3 {
    match kind {
        PathKind::Radial => mat_mul(&rot_z(theta), &rot_y(second)),
        _ => rot_z(theta),
    }
}

/// Rotates one template per readout into place.
pub fn synthesize(
    dpath: &DiscretizedPath,
    path: &SpiralPath,
    spec: &TemplateSpec,
) -> Result<Trajectory> {
    synthesize_with(dpath, path, spec, &ProfileOptions::default())
}

pub fn synthesize_with(
    dpath: &DiscretizedPath,
    path: &SpiralPath,
    spec: &TemplateSpec,
    opts: &ProfileOptions,
) -> Result<Trajectory> {
    if dpath.kind != spec.kind || path.kind != spec.kind {
        return Err(Error::KindMismatch {
            expected: spec.kind.to_string(),
            found: if dpath.kind != spec.kind { dpath.kind } else { path.kind }.to_string(),
        });
    }
    if dpath.angles.len() != dpath.count {
        return Err(Error::Assembly(format!(
            "path lists {} angles for {} readouts",
            dpath.angles.len(),
            dpath.count
        )));
    }
    // template cache key: spoke length for radial, surface label otherwise
    let cache_key = |label: f64| match spec.kind {
        PathKind::Radial => key(spoke_reach(&spec.extent, label)),
        _ => key(label),
    };
    let labels: Vec<f64> = dpath.angles.iter().map(|&(_, f)| spec.snap(f)).collect();
    let mut order: Vec<Key> = Vec::new();
    let mut first_label: HashMap<Key, f64> = HashMap::new();
    for &l in &labels {
        let k = cache_key(l);
        if let std::collections::hash_map::Entry::Vacant(v) = first_label.entry(k) {
            v.insert(l);
            order.push(k);
        }
    }
    let templates: Vec<Template> = order
        .par_iter()
        .map(|k| {
            let l = first_label[k];
            design_one(spec, l, path.interleaves_at(l), opts)
        })
        .collect::<Result<_>>()?;
    let slot: HashMap<Key, usize> = order.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let readouts: Vec<Readout> = dpath
        .angles
        .par_iter()
        .zip(labels.par_iter())
        .enumerate()
        .map(|(index, (&(theta, second), &label))| {
            let template = *slot
                .get(&cache_key(label))
                .ok_or_else(|| Error::Assembly(format!("no template for surface {label}")))?;
            let t = &templates[template];
            let rot_second = match spec.kind {
                PathKind::Radial => second,
                _ => 0.0,
            };
            let m = rotation(spec.kind, theta, rot_second);
            let k_samples = t.k_samples.iter().map(|&k| apply(&m, k)).collect();
            Ok(Readout {
                index,
                template,
                theta,
                second,
                k_samples,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Trajectory {
        kind: spec.kind,
        readouts,
        templates,
        meta: TrajectoryMeta {
            spec: *spec,
            n_real: path.n_real,
            count: dpath.count,
            offset: dpath.offset,
        },
    })
}
