//! Config-driven design: path, readout angles, templates and weights.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{synthesize_with, Trajectory};
use crate::dcf::{analytic_dcf, DcfTable};
use crate::error::Result;
use crate::io::DesignConfig;
use crate::paths::{
    design_cones_path_with, design_radial_path_with, design_stack_path_with, discretize, match_readout_count,
    DiscretizedPath, PathKind, SpiralPath,
};
use crate::templates::{cone_interleaf_table, spiral_interleaf_table, ProfileOptions};

/// Path designed with every FOV scaled by `scale`. Cones and stack paths get
/// interleaf tables designed at the scaled FOV.
pub fn path_at_scale(cfg: &DesignConfig, scale: f64) -> Result<SpiralPath> {
    let spec = cfg.template_spec(scale)?;
    let num = cfg.numerics();
    let opts = ProfileOptions::default();
    match cfg.kind {
        PathKind::Radial => design_radial_path_with(&spec.fov, &spec.extent, &num),
        PathKind::Cones => {
            let n = cone_interleaf_table(
                &spec.fov,
                &spec.extent,
                &spec.density,
                &spec.hardware,
                cfg.design.surfaces,
                &opts,
            )?;
            design_cones_path_with(&spec.fov, &spec.extent, &n, &spec.density, &num)
        }
        PathKind::Stack => {
            let n = spiral_interleaf_table(
                &spec.fov,
                &spec.stack_geometry(),
                &spec.density,
                &spec.hardware,
                cfg.design.surfaces,
                &opts,
            )?;
            design_stack_path_with(&spec.fov, &spec.extent, &spec.density, &n, &num)
        }
    }
}

/// The path for `cfg`, searching the FOV scale when a target count is set.
pub fn design_path(cfg: &DesignConfig) -> Result<(f64, SpiralPath)> {
    cfg.validate()?;
    match cfg.target_readouts {
        Some(t) => match_readout_count(|s| path_at_scale(cfg, s), t),
        None => Ok((1.0, path_at_scale(cfg, 1.0)?)),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub path_ms: f64,
    pub templates_ms: f64,
    pub dcf_ms: f64,
}

pub struct Design {
    pub config: DesignConfig,
    pub scale: f64,
    pub path: SpiralPath,
    pub discretized: DiscretizedPath,
    pub trajectory: Trajectory,
    pub dcf: DcfTable,
    pub timings: Timings,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn design(cfg: &DesignConfig) -> Result<Design> {
    let t = Instant::now();
    let (scale, path) = design_path(cfg)?;
    let discretized = discretize(&path, cfg.design.offset)?;
    let path_ms = ms(t);
    let t = Instant::now();
    let spec = cfg.template_spec(scale)?;
    let trajectory = synthesize_with(&discretized, &path, &spec, &ProfileOptions::default())?;
    let templates_ms = ms(t);
    let t = Instant::now();
    let dcf = analytic_dcf(&trajectory, &path)?;
    Ok(Design {
        config: cfg.clone(),
        scale,
        path,
        discretized,
        trajectory,
        dcf,
        timings: Timings {
            path_ms,
            templates_ms,
            dcf_ms: ms(t),
        },
    })
}
