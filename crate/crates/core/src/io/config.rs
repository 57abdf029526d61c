//! TOML design configuration.
//!
//! ```toml
//! kind = "cones"            # radial | cones | stack
//! target_readouts = 32      # optional
//! seed = 0
//!
//! [fov]                     # cm
//! l_r = 28.0
//! l_z = 14.0
//!
//! [resolution]              # mm
//! dx = 4.4
//! dz = 4.4
//!
//! [hardware]                # all optional
//! t_read_ms = 2.8
//! g_max = 39.0              # mT/m
//! s_max = 145.0             # mT/m/ms
//! dt_us = 4.0
//! gamma_bar = 42.5764       # kHz/mT
//!
//! [density]                 # all optional, each >= 1
//! alpha = 2.25
//! ```
//!
//! The `[design]`, `[analysis]` and `[output]` tables are optional too; see
//! the field docs for their defaults.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::assembly::{TemplatePolicy, TemplateSpec};
use crate::error::{Error, Result};
use crate::geometry::{DensityParams, ExtentModel, FovModel, ResolutionRule};
use crate::numerics::{NumericsConfig, DEFAULT_GRID_POINTS};
use crate::paths::{PathKind, DEFAULT_OFFSET};
use crate::templates::{HardwareConfig, DEFAULT_SURFACES, PROTON_GAMMA_BAR};
use crate::analysis::DEFAULT_PSF_BUDGET;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub kind: PathKind,
    pub fov: FovConfig,
    pub resolution: ResolutionConfig,
    #[serde(default)]
    pub hardware: HardwareSection,
    #[serde(default)]
    pub density: DensitySection,
    #[serde(default)]
    pub target_readouts: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub design: DesignSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FovConfig {
    /// In-plane FOV, cm.
    pub l_r: f64,
    /// Through-plane FOV, cm.
    pub l_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionConfig {
    /// In-plane voxel size, mm.
    pub dx: f64,
    /// Through-plane voxel size, mm.
    pub dz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardwareSection {
    pub t_read_ms: f64,
    pub g_max: f64,
    pub s_max: f64,
    pub dt_us: f64,
    pub gamma_bar: f64,
}

impl Default for HardwareSection {
    fn default() -> Self {
        Self {
            t_read_ms: 2.8,
            g_max: 39.0,
            s_max: 145.0,
            dt_us: 4.0,
            gamma_bar: PROTON_GAMMA_BAR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensitySection {
    pub alpha: f64,
    pub alpha_r: f64,
    pub alpha_z: f64,
    pub k_floor_frac: Option<f64>,
}

impl Default for DensitySection {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            alpha_r: 1.0,
            alpha_z: 1.0,
            k_floor_frac: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignSection {
    /// Surfaces on which cone and spiral interleaf counts are tabulated.
    pub surfaces: usize,
    /// Template surfaces; `None` gives one template per readout surface.
    pub template_surfaces: Option<usize>,
    pub resolution_rule: ResolutionRule,
    /// Readout `i` sits at `u = (i + offset) / N`.
    pub offset: f64,
    pub grid_points: usize,
}

impl Default for DesignSection {
    fn default() -> Self {
        Self {
            surfaces: DEFAULT_SURFACES,
            template_surfaces: None,
            resolution_rule: ResolutionRule::Coarsen,
            offset: DEFAULT_OFFSET,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Monte-Carlo points for the Voronoi oracles; `None` uses
    /// `mc_points_per_sample` times the sample count.
    pub mc_points: Option<usize>,
    pub mc_points_per_sample: usize,
    pub psf_grid: [usize; 3],
    /// Rendered PSF extent, cm; `None` uses 1.5 times the FOV.
    pub psf_extent: Option<[f64; 3]>,
    pub psf_budget: f64,
    pub cap_deg: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            mc_points: None,
            mc_points_per_sample: 300,
            psf_grid: [64; 3],
            psf_extent: None,
            psf_budget: DEFAULT_PSF_BUDGET,
            cap_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Output directory; `None` falls back to `KSPACE_OUT`, then `out`.
    pub dir: Option<PathBuf>,
    /// File stem; defaults to the trajectory kind.
    pub name: Option<String>,
}

fn bad(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(field, format!("must be positive (got {v})")))
    }
}

/// Parses and validates a TOML document. Errors name the offending field.
pub fn parse_config(text: &str) -> Result<DesignConfig> {
    let de = toml::Deserializer::new(text);
    let cfg: DesignConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        bad(if path == "." { "<root>" } else { &path }, inner.message().trim().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl DesignConfig {
    /// Minimal config with every optional table at its default.
    pub fn new(kind: PathKind, fov: FovConfig, resolution: ResolutionConfig) -> Self {
        Self {
            kind,
            fov,
            resolution,
            hardware: HardwareSection::default(),
            density: DensitySection::default(),
            target_readouts: None,
            seed: 0,
            design: DesignSection::default(),
            analysis: AnalysisSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("fov.l_r", self.fov.l_r)?;
        positive("fov.l_z", self.fov.l_z)?;
        positive("resolution.dx", self.resolution.dx)?;
        positive("resolution.dz", self.resolution.dz)?;
        let h = &self.hardware;
        positive("hardware.t_read_ms", h.t_read_ms)?;
        positive("hardware.g_max", h.g_max)?;
        positive("hardware.s_max", h.s_max)?;
        positive("hardware.dt_us", h.dt_us)?;
        positive("hardware.gamma_bar", h.gamma_bar)?;
        let d = &self.density;
        for (f, a) in [("density.alpha", d.alpha), ("density.alpha_r", d.alpha_r), ("density.alpha_z", d.alpha_z)] {
            if !(a >= 1.0 && a.is_finite()) {
                return Err(bad(f, format!("must be >= 1 (got {a})")));
            }
        }
        if let Some(f) = d.k_floor_frac {
            if !(f > 0.0 && f < 1.0) {
                return Err(bad("density.k_floor_frac", format!("must lie in (0, 1) (got {f})")));
            }
        }
        if self.target_readouts == Some(0) {
            return Err(bad("target_readouts", "must be at least 1"));
        }
        let s = &self.design;
        if s.surfaces < 2 {
            return Err(bad("design.surfaces", "must be at least 2"));
        }
        if matches!(s.template_surfaces, Some(n) if n < 2) {
            return Err(bad("design.template_surfaces", "must be at least 2"));
        }
        if !(0.0..1.0).contains(&s.offset) {
            return Err(bad("design.offset", format!("must lie in [0, 1) (got {})", s.offset)));
        }
        if s.grid_points < 16 {
            return Err(bad("design.grid_points", "must be at least 16"));
        }
        let a = &self.analysis;
        if a.mc_points == Some(0) {
            return Err(bad("analysis.mc_points", "must be at least 1"));
        }
        if a.psf_grid.contains(&0) {
            return Err(bad("analysis.psf_grid", "every dimension must be at least 1"));
        }
        if let Some(ext) = a.psf_extent {
            for v in ext {
                positive("analysis.psf_extent", v)?;
            }
        }
        positive("analysis.psf_budget", a.psf_budget)?;
        if !(0.0..90.0).contains(&a.cap_deg) {
            return Err(bad("analysis.cap_deg", format!("must lie in [0, 90) (got {})", a.cap_deg)));
        }
        Ok(())
    }

    pub fn fov_model(&self) -> Result<FovModel> {
        FovModel::new(self.fov.l_r, self.fov.l_z)
    }

    pub fn extent_model(&self) -> Result<ExtentModel> {
        ExtentModel::from_resolution(0.1 * self.resolution.dx, 0.1 * self.resolution.dz)
    }

    pub fn density_params(&self) -> Result<DensityParams> {
        let d = DensityParams {
            alpha: self.density.alpha,
            alpha_r: self.density.alpha_r,
            alpha_z: self.density.alpha_z,
            k_floor_frac: self.density.k_floor_frac,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn hardware_config(&self) -> Result<HardwareConfig> {
        let h = &self.hardware;
        HardwareConfig::new(h.g_max, h.s_max, 1e-3 * h.dt_us, h.gamma_bar, h.t_read_ms)
    }

    pub fn numerics(&self) -> NumericsConfig {
        NumericsConfig {
            grid_points: self.design.grid_points,
            ..NumericsConfig::default()
        }
    }

    pub fn template_policy(&self) -> TemplatePolicy {
        match self.design.template_surfaces {
            None => TemplatePolicy::PerReadout,
            Some(surfaces) => TemplatePolicy::Grid { surfaces },
        }
    }

    /// Template spec with the FOV scaled by `scale`.
    pub fn template_spec(&self, scale: f64) -> Result<TemplateSpec> {
        Ok(TemplateSpec {
            kind: self.kind,
            fov: self.fov_model()?.scaled(scale)?,
            extent: self.extent_model()?,
            density: self.density_params()?,
            hardware: self.hardware_config()?,
            rule: self.design.resolution_rule,
            policy: self.template_policy(),
        })
    }

    /// PSF render extent, cm.
    pub fn psf_extent(&self) -> [f64; 3] {
        self.analysis
            .psf_extent
            .unwrap_or([1.5 * self.fov.l_r, 1.5 * self.fov.l_r, 1.5 * self.fov.l_z])
    }

    pub fn output_name(&self) -> String {
        self.output.name.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
