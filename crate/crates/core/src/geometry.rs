//! Elliptical field-of-view and k-space extent laws, the conic-surface FOV,
//! variable-density FOV modulation and the spherical stack radial extent.
//!
//! Angles are polar angles measured from +k_z. Lengths are in cm, spatial
//! frequencies in cm^-1.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn ellipse_radius(a_r: f64, a_z: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    a_r * a_z / ((a_r * c).powi(2) + (a_z * s).powi(2)).sqrt()
}

/// Field of view in the radial (in-plane) and z directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovModel {
    pub l_r: f64,
    pub l_z: f64,
}

impl FovModel {
    pub fn new(l_r: f64, l_z: f64) -> Result<Self> {
        if !(l_r > 0.0 && l_z > 0.0) || !l_r.is_finite() || !l_z.is_finite() {
            return Err(Error::invalid(format!("FOV must be positive (got {l_r}, {l_z})")));
        }
        Ok(Self { l_r, l_z })
    }

    pub fn isotropic(l: f64) -> Result<Self> {
        Self::new(l, l)
    }

    /// Both FOVs multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.l_r * s, self.l_z * s)
    }
}

/// Maximum k-space radius in the radial and z directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtentModel {
    pub k_r: f64,
    pub k_z: f64,
}

impl ExtentModel {
    pub fn new(k_r: f64, k_z: f64) -> Result<Self> {
        if !(k_r > 0.0 && k_z > 0.0) || !k_r.is_finite() || !k_z.is_finite() {
            return Err(Error::invalid(format!("extent must be positive (got {k_r}, {k_z})")));
        }
        Ok(Self { k_r, k_z })
    }

    pub fn isotropic(k: f64) -> Result<Self> {
        Self::new(k, k)
    }

    /// Extent from voxel sizes in cm: `K = 1 / (2 delta)`.
    pub fn from_resolution(dx_cm: f64, dz_cm: f64) -> Result<Self> {
        if !(dx_cm > 0.0 && dz_cm > 0.0) {
            return Err(Error::invalid(format!(
                "resolution must be positive (got {dx_cm}, {dz_cm})"
            )));
        }
        Self::new(0.5 / dx_cm, 0.5 / dz_cm)
    }
}

/// Variable-density exponents. `alpha = 1` keeps the density uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    /// Cones radial law.
    pub alpha: f64,
    /// Stack in-plane law.
    pub alpha_r: f64,
    /// Stack z law.
    pub alpha_z: f64,
    /// Lower clamp on the normalized radius. `None` uses half a Nyquist cell,
    /// `1 / (2 L K)`, evaluated with the FOV and extent of each law.
    pub k_floor_frac: Option<f64>,
}

impl Default for DensityParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            alpha_r: 1.0,
            alpha_z: 1.0,
            k_floor_frac: None,
        }
    }
}

impl DensityParams {
    pub fn new(alpha: f64, alpha_r: f64, alpha_z: f64) -> Result<Self> {
        let d = Self {
            alpha,
            alpha_r,
            alpha_z,
            k_floor_frac: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha", self.alpha), ("alpha_r", self.alpha_r), ("alpha_z", self.alpha_z)] {
            if !(a >= 1.0) || !a.is_finite() {
                return Err(Error::invalid(format!("{name} must be >= 1 (got {a})")));
            }
        }
        if let Some(f) = self.k_floor_frac {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::invalid(format!("k_floor_frac must lie in (0, 1) (got {f})")));
            }
        }
        Ok(())
    }

    fn floor_or(&self, nyquist_half_cell: f64) -> f64 {
        self.k_floor_frac.unwrap_or(nyquist_half_cell).min(1.0)
    }
}

/// `L(phi) = L_r L_z / sqrt(L_r^2 cos^2 phi + L_z^2 sin^2 phi)`.
pub fn fov_at(m: &FovModel, phi: f64) -> f64 {
    ellipse_radius(m.l_r, m.l_z, phi)
}

/// FOV in the direction orthogonal to `phi`, `L(phi + pi/2)`.
pub fn orthogonal_fov(m: &FovModel, phi: f64) -> f64 {
    fov_at(m, (phi + FRAC_PI_2).rem_euclid(PI))
}

pub fn extent_at(m: &ExtentModel, phi: f64) -> f64 {
    ellipse_radius(m.k_r, m.k_z, phi)
}

/// FOV measured along a conic surface of half-angle `phi`.
pub fn cone_fov(m: &FovModel, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    ((m.l_z * c).powi(2) + (m.l_r * s).powi(2)).sqrt()
}

/// `|ratio|^(1/alpha - 1)` with the ratio clamped below at `floor`.
pub(crate) fn density_factor(ratio: f64, alpha: f64, floor: f64) -> f64 {
    if alpha == 1.0 {
        return 1.0;
    }
    ratio.abs().max(floor).powf(1.0 / alpha - 1.0)
}

/// Cones variable-density FOV, `L(phi) |k / K(phi)|^(1/alpha - 1)`.
pub fn vd_fov_radial(m: &FovModel, e: &ExtentModel, d: &DensityParams, k: f64, phi: f64) -> f64 {
    let l = fov_at(m, phi);
    let big_k = extent_at(e, phi);
    l * density_factor(k / big_k, d.alpha, d.floor_or(0.5 / (l * big_k)))
}

/// Stack z-direction FOV, `L_z |z / k_max_z|^(1/alpha_z - 1)`.
pub fn vd_fov_z(m: &FovModel, d: &DensityParams, z: f64, k_max_z: f64) -> f64 {
    m.l_z * density_factor(z / k_max_z, d.alpha_z, d.floor_or(0.5 / (m.l_z * k_max_z)))
}

/// Stack in-plane FOV on a plane whose spiral reaches `kr_max`,
/// `L_r |k / kr_max|^(1/alpha_r - 1)`.
pub fn vd_fov_inplane(m: &FovModel, d: &DensityParams, k: f64, kr_max: f64) -> f64 {
    m.l_r * density_factor(k / kr_max, d.alpha_r, d.floor_or(0.5 / (m.l_r * kr_max)))
}

/// Normalized floor used by [`vd_fov_inplane`] for a plane of radius `kr_max`.
pub(crate) fn inplane_floor(m: &FovModel, d: &DensityParams, kr_max: f64) -> f64 {
    d.floor_or(0.5 / (m.l_r * kr_max))
}

/// Normalized floor used by [`vd_fov_radial`] on the cone at `phi`.
pub(crate) fn radial_floor(m: &FovModel, e: &ExtentModel, d: &DensityParams, phi: f64) -> f64 {
    d.floor_or(0.5 / (fov_at(m, phi) * extent_at(e, phi)))
}

/// Which way the final step of the spherical radial-resolution rule picks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResolutionRule {
    /// `max(delta_min, 1 / (2 kr_max))`: resolution coarsens toward the poles.
    #[default]
    Coarsen,
    /// `min(delta_min, 1 / (2 kr_max))`, which always yields `delta_min` on an
    /// ellipsoid (a cylindrical stack).
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialResolution {
    /// Polar angle of the ellipsoid point at this plane height.
    pub phi: f64,
    /// Unfloored in-plane radius of the ellipsoid at this plane.
    pub kr_max: f64,
    pub delta_r: f64,
}

impl RadialResolution {
    /// In-plane extent actually covered by the plane's spiral.
    pub fn kr_extent(&self) -> f64 {
        0.5 / self.delta_r
    }
}

/// In-plane resolution of a spherical stack-of-spirals plane at height `k_z`.
///
/// `kr_floor` keeps the extent of the pole planes at a constructible size
/// (one Nyquist cell, `1 / L_r`, in the designs of this crate).
pub fn spherical_radial_resolution(
    e: &ExtentModel,
    delta_min: f64,
    k_z: f64,
    rule: ResolutionRule,
    kr_floor: f64,
) -> Result<RadialResolution> {
    if !(delta_min > 0.0) {
        return Err(Error::invalid(format!("delta_min must be positive (got {delta_min})")));
    }
    let tol = 1e-12 * e.k_z;
    if k_z.abs() > e.k_z + tol {
        return Err(Error::domain(format!(
            "|k_z| = {} exceeds the axial extent {}",
            k_z.abs(),
            e.k_z
        )));
    }
    let (kr, kz) = (e.k_r, e.k_z);
    let denom = ((kz * kr).powi(2) + (kz * k_z).powi(2) - (kr * k_z).powi(2)).sqrt();
    let phi = (kz * k_z / denom).clamp(-1.0, 1.0).acos();
    let kr_max = (extent_at(e, phi) * phi.sin()).abs();
    let kr_eff = kr_max.max(kr_floor);
    let candidate = 0.5 / kr_eff;
    let delta_r = match rule {
        ResolutionRule::Coarsen => candidate.max(delta_min),
        ResolutionRule::Literal => candidate.min(delta_min),
    };
    Ok(RadialResolution { phi, kr_max, delta_r })
}

/// Plane geometry of a spherical stack of spirals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackGeometry {
    pub extent: ExtentModel,
    /// Finest in-plane resolution, `1 / (2 K_r)`.
    pub delta_min: f64,
    pub rule: ResolutionRule,
    /// Smallest in-plane extent given to a plane, `1 / L_r`.
    pub kr_floor: f64,
}

impl StackGeometry {
    pub fn new(fov: &FovModel, extent: &ExtentModel, rule: ResolutionRule) -> Self {
        Self {
            extent: *extent,
            delta_min: 0.5 / extent.k_r,
            rule,
            kr_floor: 1.0 / fov.l_r,
        }
    }

    pub fn plane(&self, z: f64) -> Result<RadialResolution> {
        spherical_radial_resolution(&self.extent, self.delta_min, z, self.rule, self.kr_floor)
    }
}
