//! Readout templates: straight spokes, twisted conic interleaves and planar
//! spiral interleaves, sampled at the gradient raster under amplitude and
//! slew limits, plus the per-surface interleaf counts they imply.

mod profile;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    cone_fov, extent_at, inplane_floor, radial_floor, DensityParams, ExtentModel, FovModel,
    StackGeometry,
};
use crate::numerics::{uniform_grid, SampledFunction};
use crate::vec3::{dot, norm, scale, sub, Vec3};

pub use profile::ProfileOptions;

/// cm^-1/ms of k-space speed per (kHz/mT x mT/m) of gamma_bar x gradient.
pub const KSPACE_RATE_PER_GAMMA_GRADIENT: f64 = 0.01;

/// Proton gyromagnetic ratio over 2 pi, in kHz/mT.
pub const PROTON_GAMMA_BAR: f64 = 42.5764;

/// Slack allowed on the amplitude and slew checks.
const LIMIT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareConfig {
    /// Gradient amplitude limit, mT/m.
    pub g_max: f64,
    /// Slew-rate limit, mT/m/ms.
    pub s_max: f64,
    /// Gradient raster, ms.
    pub dt: f64,
    /// Gyromagnetic ratio over 2 pi, kHz/mT.
    pub gamma_bar: f64,
    /// Readout window, ms.
    pub t_read: f64,
}

impl HardwareConfig {
    pub fn new(g_max: f64, s_max: f64, dt: f64, gamma_bar: f64, t_read: f64) -> Result<Self> {
        let hw = Self {
            g_max,
            s_max,
            dt,
            gamma_bar,
            t_read,
        };
        for (name, v) in [
            ("g_max", g_max),
            ("s_max", s_max),
            ("dt", dt),
            ("gamma_bar", gamma_bar),
            ("t_read", t_read),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive (got {v})")));
            }
        }
        Ok(hw)
    }

    /// 39 mT/m, 145 mT/m/ms, 4 us raster, protons.
    pub fn clinical(t_read: f64) -> Result<Self> {
        Self::new(39.0, 145.0, 0.004, PROTON_GAMMA_BAR, t_read)
    }

    /// k-space speed in cm^-1/ms produced by a 1 mT/m gradient.
    pub fn k_rate(&self) -> f64 {
        self.gamma_bar * KSPACE_RATE_PER_GAMMA_GRADIENT
    }

    pub fn with_t_read(mut self, t_read: f64) -> Self {
        self.t_read = t_read;
        self
    }
}

/// Surface a template lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "surface", content = "value", rename_all = "kebab-case")]
pub enum SurfaceLabel {
    /// Polar angle of a spoke direction or conic surface, rad.
    Polar(f64),
    /// Height of a stack plane, cm^-1.
    Plane(f64),
}

impl SurfaceLabel {
    pub fn value(&self) -> f64 {
        match *self {
            SurfaceLabel::Polar(v) | SurfaceLabel::Plane(v) => v,
        }
    }
}

/// One readout on its surface, before rotation into place.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub surface: SurfaceLabel,
    /// k-space positions at the raster, cm^-1.
    pub k_samples: Vec<Vec3>,
    /// Gradient held over each raster interval, mT/m. The last entry repeats
    /// the final interval.
    pub g_samples: Vec<Vec3>,
    pub twist_count: u32,
    pub dt: f64,
    k_rate: f64,
}

impl Template {
    fn build(
        surface: SurfaceLabel,
        k_samples: Vec<Vec3>,
        g_samples: Vec<Vec3>,
        twist_count: u32,
        hw: &HardwareConfig,
    ) -> Result<Self> {
        let t = Self {
            surface,
            k_samples,
            g_samples,
            twist_count,
            dt: hw.dt,
            k_rate: hw.k_rate(),
        };
        t.validate(hw)?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.k_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_samples.is_empty()
    }

    /// Time of the last sample, ms.
    pub fn duration(&self) -> f64 {
        self.dt * (self.k_samples.len().saturating_sub(1)) as f64
    }

    pub fn end_radius(&self) -> f64 {
        self.k_samples.last().map(|&k| norm(k)).unwrap_or(0.0)
    }

    /// Gradient at raster point `i`: the mean of the two adjacent intervals.
    pub fn gradient_at(&self, i: usize) -> Vec3 {
        let g = &self.g_samples;
        if i == 0 || i + 1 >= g.len() {
            return g[i.min(g.len() - 1)];
        }
        scale([g[i - 1][0] + g[i][0], g[i - 1][1] + g[i][1], g[i - 1][2] + g[i][2]], 0.5)
    }

    /// `g . k` at every raster point (3D dot product).
    pub fn radial_dot(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| dot(self.gradient_at(i), self.k_samples[i]))
            .collect()
    }

    /// In-plane `g_r . k_r` at every raster point.
    pub fn inplane_dot(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let g = self.gradient_at(i);
                let k = self.k_samples[i];
                g[0] * k[0] + g[1] * k[1]
            })
            .collect()
    }

    pub fn max_amplitude(&self) -> f64 {
        profile::max_amplitude(&self.g_samples)
    }

    pub fn max_slew(&self) -> f64 {
        profile::max_slew(&self.g_samples, self.dt)
    }

    /// Largest gap between the samples and the running integral of the
    /// gradient, cm^-1.
    pub fn integral_deviation(&self) -> f64 {
        let mut acc = self.k_samples[0];
        let mut worst: f64 = 0.0;
        for i in 1..self.k_samples.len() {
            acc = crate::vec3::add(acc, scale(self.g_samples[i - 1], self.k_rate * self.dt));
            worst = worst.max(norm(sub(acc, self.k_samples[i])));
        }
        worst
    }

    /// Checks the amplitude, slew and k/g consistency invariants.
    pub fn validate(&self, hw: &HardwareConfig) -> Result<()> {
        if self.k_samples.len() < 2 || self.k_samples.len() != self.g_samples.len() {
            return Err(Error::Invariant(format!(
                "template needs matching k/g lists of length >= 2 (got {}, {})",
                self.k_samples.len(),
                self.g_samples.len()
            )));
        }
        let amp = self.max_amplitude();
        if amp > hw.g_max + LIMIT_SLACK {
            return Err(Error::Invariant(format!("gradient amplitude {amp} exceeds {}", hw.g_max)));
        }
        let slew = self.max_slew();
        if slew > hw.s_max + LIMIT_SLACK {
            return Err(Error::Invariant(format!("slew rate {slew} exceeds {}", hw.s_max)));
        }
        let dev = self.integral_deviation();
        if dev >= 1e-6 {
            return Err(Error::Invariant(format!(
                "k samples deviate from the gradient integral by {dev} cm^-1"
            )));
        }
        Ok(())
    }
}

/// Straight center-out spoke along +k_z reaching `K(phi)`.
pub fn design_radial_spoke(e: &ExtentModel, hw: &HardwareConfig, phi: f64) -> Result<Template> {
    design_radial_spoke_with(e, hw, phi, &ProfileOptions::default())
}

pub fn design_radial_spoke_with(
    e: &ExtentModel,
    hw: &HardwareConfig,
    phi: f64,
    opts: &ProfileOptions,
) -> Result<Template> {
    let reach = extent_at(e, phi);
    let line = |p: f64| [0.0, 0.0, p];
    let r = profile::synthesize(&line, reach, opts.nodes_for_turns(0.0), hw, opts)?;
    Template::build(SurfaceLabel::Polar(phi), r.k, r.g, 1, hw)
}

/// `int_0^k max(tau / reach, floor)^(1/alpha - 1) d tau`.
pub(crate) fn twist_integral(k: f64, reach: f64, alpha: f64, floor: f64) -> f64 {
    if alpha == 1.0 {
        return k;
    }
    let e = 1.0 / alpha - 1.0;
    let k0 = floor * reach;
    let flat = floor.powf(e);
    if k <= k0 {
        flat * k
    } else {
        flat * k0 + reach / (e + 1.0) * ((k / reach).powf(e + 1.0) - floor.powf(e + 1.0))
    }
}

/// Azimuth of a conic interleaf at radius `k`.
///
/// With `alpha = 1` this is `2 pi L_c(phi) k / n`. The variable-density law
/// scales the local twist rate by `L(k; phi, alpha) / L(phi)`, which equals
/// one at `k = K(phi)`.
pub fn cone_twist(fm: &FovModel, e: &ExtentModel, d: &DensityParams, phi: f64, n: u32, k: f64) -> f64 {
    let reach = extent_at(e, phi);
    let floor = radial_floor(fm, e, d, phi);
    2.0 * PI * cone_fov(fm, phi) * twist_integral(k, reach, d.alpha, floor) / n as f64
}

pub fn design_cone_template(
    fm: &FovModel,
    e: &ExtentModel,
    d: &DensityParams,
    hw: &HardwareConfig,
    phi: f64,
    n: u32,
) -> Result<Template> {
    design_cone_template_with(fm, e, d, hw, phi, n, &ProfileOptions::default())
}

pub fn design_cone_template_with(
    fm: &FovModel,
    e: &ExtentModel,
    d: &DensityParams,
    hw: &HardwareConfig,
    phi: f64,
    n: u32,
    opts: &ProfileOptions,
) -> Result<Template> {
    if n == 0 {
        return Err(Error::invalid("interleaf count must be at least 1"));
    }
    let reach = extent_at(e, phi);
    let (s, c) = phi.sin_cos();
    let curve = |k: f64| {
        let th = cone_twist(fm, e, d, phi, n, k);
        [k * th.cos() * s, k * th.sin() * s, k * c]
    };
    let turns = cone_twist(fm, e, d, phi, n, reach) / (2.0 * PI);
    let r = profile::synthesize(&curve, reach, opts.nodes_for_turns(turns), hw, opts)?;
    Template::build(SurfaceLabel::Polar(phi), r.k, r.g, n, hw)
}

/// Azimuth of a planar spiral interleaf at in-plane radius `k` on a plane
/// whose spiral reaches `kr_extent`.
pub fn spiral_twist(fm: &FovModel, d: &DensityParams, kr_extent: f64, n: u32, k: f64) -> f64 {
    let floor = inplane_floor(fm, d, kr_extent);
    2.0 * PI * fm.l_r * twist_integral(k, kr_extent, d.alpha_r, floor) / n as f64
}

pub fn design_spiral_template(
    fm: &FovModel,
    stack: &StackGeometry,
    d: &DensityParams,
    hw: &HardwareConfig,
    z: f64,
    n: u32,
) -> Result<Template> {
    design_spiral_template_with(fm, stack, d, hw, z, n, &ProfileOptions::default())
}

pub fn design_spiral_template_with(
    fm: &FovModel,
    stack: &StackGeometry,
    d: &DensityParams,
    hw: &HardwareConfig,
    z: f64,
    n: u32,
    opts: &ProfileOptions,
) -> Result<Template> {
    if n == 0 {
        return Err(Error::invalid("interleaf count must be at least 1"));
    }
    let reach = stack.plane(z)?.kr_extent();
    let curve = |k: f64| {
        let th = spiral_twist(fm, d, reach, n, k);
        [k * th.cos(), k * th.sin(), z]
    };
    let turns = spiral_twist(fm, d, reach, n, reach) / (2.0 * PI);
    let r = profile::synthesize(&curve, reach, opts.nodes_for_turns(turns), hw, opts)?;
    Template::build(SurfaceLabel::Plane(z), r.k, r.g, n, hw)
}

/// Smallest `n` for which `design(n)` succeeds, given that `design` is
/// monotone in `n` and `limit_ok` says the zero-twist limit is feasible.
fn smallest_feasible(design: impl Fn(u32) -> Result<Template>) -> Result<u32> {
    const CAP: u32 = 1 << 24;
    let mut hi = 1u32;
    let mut lo = 0u32;
    loop {
        match design(hi) {
            Ok(_) => break,
            Err(Error::Infeasible { .. }) if hi < CAP => {
                lo = hi;
                hi *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match design(mid) {
            Ok(_) => hi = mid,
            Err(Error::Infeasible { .. }) => lo = mid,
            Err(e) => return Err(e),
        }
    }
    Ok(hi)
}

pub fn estimate_cone_interleaves(
    fm: &FovModel,
    e: &ExtentModel,
    d: &DensityParams,
    hw: &HardwareConfig,
    phi: f64,
) -> Result<u32> {
    estimate_cone_interleaves_with(fm, e, d, hw, phi, &ProfileOptions::default())
}

pub fn estimate_cone_interleaves_with(
    fm: &FovModel,
    e: &ExtentModel,
    d: &DensityParams,
    hw: &HardwareConfig,
    phi: f64,
    opts: &ProfileOptions,
) -> Result<u32> {
    // an infinitely interleaved cone is a spoke
    design_radial_spoke_with(e, hw, phi, opts)?;
    smallest_feasible(|n| design_cone_template_with(fm, e, d, hw, phi, n, opts))
}

pub fn estimate_spiral_interleaves(
    fm: &FovModel,
    stack: &StackGeometry,
    d: &DensityParams,
    hw: &HardwareConfig,
    z: f64,
) -> Result<u32> {
    estimate_spiral_interleaves_with(fm, stack, d, hw, z, &ProfileOptions::default())
}

pub fn estimate_spiral_interleaves_with(
    fm: &FovModel,
    stack: &StackGeometry,
    d: &DensityParams,
    hw: &HardwareConfig,
    z: f64,
    opts: &ProfileOptions,
) -> Result<u32> {
    let reach = stack.plane(z)?.kr_extent();
    let line = |p: f64| [p, 0.0, z];
    profile::synthesize(&line, reach, opts.nodes_for_turns(0.0), hw, opts)?;
    smallest_feasible(|n| design_spiral_template_with(fm, stack, d, hw, z, n, opts))
}

/// Default number of surfaces tabulated for `n(phi)` and `n(z)`.
pub const DEFAULT_SURFACES: usize = 64;

/// Tabulates a mirror-symmetric count on `surfaces` uniform nodes of `[a, b]`.
fn symmetric_table(
    a: f64,
    b: f64,
    surfaces: usize,
    count: impl Fn(f64) -> Result<u32> + Sync,
) -> Result<SampledFunction> {
    if surfaces < 2 {
        return Err(Error::invalid("at least 2 surfaces are needed"));
    }
    let x = uniform_grid(a, b, surfaces);
    let half = surfaces.div_ceil(2);
    let counts: Vec<u32> = x[..half]
        .par_iter()
        .map(|&v| count(v))
        .collect::<Result<_>>()?;
    let y = (0..surfaces)
        .map(|i| counts[i.min(surfaces - 1 - i)] as f64)
        .collect();
    SampledFunction::new(x, y)
}

/// `n(phi)` on `surfaces` cones spanning `[0, pi]`, linearly interpolated.
pub fn cone_interleaf_table(
    fm: &FovModel,
    e: &ExtentModel,
    d: &DensityParams,
    hw: &HardwareConfig,
    surfaces: usize,
    opts: &ProfileOptions,
) -> Result<SampledFunction> {
    symmetric_table(0.0, PI, surfaces, |phi| {
        estimate_cone_interleaves_with(fm, e, d, hw, phi, opts)
    })
}

/// `n(z)` on `surfaces` planes spanning `[-K_z, K_z]`.
pub fn spiral_interleaf_table(
    fm: &FovModel,
    stack: &StackGeometry,
    d: &DensityParams,
    hw: &HardwareConfig,
    surfaces: usize,
    opts: &ProfileOptions,
) -> Result<SampledFunction> {
    let kz = stack.extent.k_z;
    symmetric_table(-kz, kz, surfaces, |z| {
        estimate_spiral_interleaves_with(fm, stack, d, hw, z, opts)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ResolutionRule;

    fn hw(t_read: f64) -> HardwareConfig {
        HardwareConfig::clinical(t_read).unwrap()
    }

    #[test]
    fn unit_conversion_constant() {
        // 42.5764 MHz/T at 1 mT/m is 0.425764 cycles/cm per ms
        let h = hw(1.0);
        assert!((h.k_rate() - 0.425764).abs() < 1e-12);
        assert!((h.k_rate() * 39.0 - 16.6048).abs() < 1e-3);
    }

    #[test]
    fn spoke_reaches_extent() {
        let e = ExtentModel::isotropic(1.25).unwrap();
        let t = design_radial_spoke(&e, &hw(10.0), 0.3).unwrap();
        assert!((t.end_radius() - 1.25).abs() < 1e-6);
        assert_eq!(t.k_samples[0], [0.0; 3]);
        assert_eq!(t.twist_count, 1);
        for k in &t.k_samples {
            assert!(k[0].abs() < 1e-15 && k[1].abs() < 1e-15);
        }
    }

    /// Trapezoid algebra: ramp at the slew limit to g_max, then plateau.
    fn trapezoid_time(reach: f64, h: &HardwareConfig, slew: f64) -> f64 {
        let c = h.k_rate();
        let ramp = h.g_max / slew;
        let ramp_area = 0.5 * c * h.g_max * ramp;
        if reach <= ramp_area {
            (2.0 * reach / (c * slew)).sqrt()
        } else {
            ramp + (reach - ramp_area) / (c * h.g_max)
        }
    }

    #[test]
    fn spoke_time_matches_trapezoid() {
        let h = HardwareConfig::new(39.0, 145.0, 0.004, PROTON_GAMMA_BAR, 10.0).unwrap();
        let e = ExtentModel::isotropic(8.0).unwrap();
        let t = design_radial_spoke(&e, &h, 0.0).unwrap();
        // the profile runs at the default slew margin
        let expected = trapezoid_time(8.0, &h, 145.0 * ProfileOptions::default().slew_margin);
        assert!((t.duration() - expected).abs() <= h.dt, "{} vs {expected}", t.duration());
        assert!(t.duration() >= expected);
    }

    #[test]
    fn short_window_is_infeasible() {
        let e = ExtentModel::isotropic(1.25).unwrap();
        match design_radial_spoke(&e, &hw(0.05), 0.0) {
            Err(Error::Infeasible { min_t_read, .. }) => assert!(min_t_read > 0.05),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn rastered_spiral_stays_in_window() {
        let fm = FovModel::new(30.889934459577404, 30.889934459577404 * 0.2).unwrap();
        let e = ExtentModel::from_resolution(0.15, 0.15).unwrap();
        let h = HardwareConfig::new(61.05456700881409, 173.69649812930675, 0.01, PROTON_GAMMA_BAR, 2.36986945738856)
            .unwrap();
        let d = DensityParams::new(1.0, 2.556512667457596, 1.0).unwrap();
        let stack = StackGeometry::new(&fm, &e, ResolutionRule::Coarsen);
        let z = (2.0 * 0.5495864258628127 - 1.0) * 0.95 * e.k_z;
        let n = estimate_spiral_interleaves(&fm, &stack, &d, &h, z).unwrap();
        let t = design_spiral_template(&fm, &stack, &d, &h, z, n).unwrap();
        assert!(t.duration() <= h.t_read, "{} > {}", t.duration(), h.t_read);
        assert!(t.validate(&h).is_ok());
    }

    #[test]
    fn cone_twist_law() {
        let fm = FovModel::new(28.0, 14.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.12).unwrap();
        let d = DensityParams::default();
        let phi = 1.0;
        let reach = extent_at(&e, phi);
        let total = cone_twist(&fm, &e, &d, phi, 10, reach);
        assert!((total - 2.0 * PI * cone_fov(&fm, phi) * reach / 10.0).abs() < 1e-12);
        let doubled = cone_twist(&fm, &e, &d, phi, 20, reach);
        assert!((doubled - total / 2.0).abs() < 1e-12);
    }

    #[test]
    fn variable_density_twist_matches_uniform_rate_at_edge() {
        let fm = FovModel::new(28.0, 14.0).unwrap();
        let e = ExtentModel::from_resolution(0.44, 0.44).unwrap();
        let d = DensityParams::new(2.25, 1.0, 1.0).unwrap();
        let phi = 0.8;
        let reach = extent_at(&e, phi);
        let h = 1e-6 * reach;
        let rate = (cone_twist(&fm, &e, &d, phi, 4, reach) - cone_twist(&fm, &e, &d, phi, 4, reach - h)) / h;
        let uniform = 2.0 * PI * cone_fov(&fm, phi) / 4.0;
        assert!((rate / uniform - 1.0).abs() < 1e-4);
        // denser twisting toward the centre
        let inner = (cone_twist(&fm, &e, &d, phi, 4, 0.3 * reach + h) - cone_twist(&fm, &e, &d, phi, 4, 0.3 * reach)) / h;
        assert!(inner > 1.5 * uniform);
    }

    #[test]
    fn cone_templates_respect_limits() {
        let fm = FovModel::new(28.0, 14.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.12).unwrap();
        let d = DensityParams::default();
        let h = hw(2.8);
        let t = design_cone_template(&fm, &e, &d, &h, 1.2, 200).unwrap();
        t.validate(&h).unwrap();
        assert!((t.end_radius() - extent_at(&e, 1.2)).abs() < 1e-9);
        assert_eq!(t.k_samples[0], [0.0; 3]);
        assert!(t.duration() <= 2.8);
    }

    #[test]
    fn many_interleaves_approach_a_spoke() {
        let fm = FovModel::new(28.0, 14.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.12).unwrap();
        let d = DensityParams::default();
        let h = hw(5.0);
        let spoke = design_radial_spoke(&e, &h, 1.0).unwrap();
        let cone = design_cone_template(&fm, &e, &d, &h, 1.0, 100_000).unwrap();
        assert!((cone.duration() - spoke.duration()).abs() <= 2.0 * h.dt);
    }

    #[test]
    fn long_readouts_need_one_interleaf() {
        let fm = FovModel::new(28.0, 14.0).unwrap();
        let e = ExtentModel::from_resolution(0.44, 0.44).unwrap();
        let d = DensityParams::default();
        assert_eq!(estimate_cone_interleaves(&fm, &e, &d, &hw(200.0), 1.0).unwrap(), 1);
    }

    #[test]
    fn interleaf_count_is_smallest_feasible() {
        let fm = FovModel::new(28.0, 14.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.12).unwrap();
        let d = DensityParams::default();
        let h = hw(2.8);
        let n = estimate_cone_interleaves(&fm, &e, &d, &h, 1.3).unwrap();
        assert!(n > 1);
        assert!(design_cone_template(&fm, &e, &d, &h, 1.3, n).is_ok());
        assert!(matches!(
            design_cone_template(&fm, &e, &d, &h, 1.3, n - 1),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn interleaf_count_monotone_in_readout() {
        let fm = FovModel::new(28.0, 14.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.12).unwrap();
        let d = DensityParams::default();
        let counts: Vec<u32> = [1.5, 2.0, 2.8, 4.0, 6.0]
            .iter()
            .map(|&t| estimate_cone_interleaves(&fm, &e, &d, &hw(t), 1.2).unwrap())
            .collect();
        assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    }

    #[test]
    fn cone_counts_peak_in_plane() {
        let fm = FovModel::new(28.0, 14.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.12).unwrap();
        let d = DensityParams::default();
        let table = cone_interleaf_table(&fm, &e, &d, &hw(2.8), 17, &ProfileOptions::default()).unwrap();
        let y = table.ordinates();
        let peak = y.iter().cloned().fold(0.0, f64::max);
        assert_eq!(y[8], peak, "{y:?}");
        assert_eq!(y[0], 1.0);
        for i in 0..17 {
            assert_eq!(y[i], y[16 - i]);
        }
    }

    #[test]
    fn uniform_spiral_turn_count() {
        let fm = FovModel::new(28.0, 3.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.15).unwrap();
        let stack = StackGeometry::new(&fm, &e, ResolutionRule::Coarsen);
        let d = DensityParams::default();
        let kr = stack.plane(0.0).unwrap().kr_extent();
        let turns = spiral_twist(&fm, &d, kr, 80, kr) / (2.0 * PI);
        assert!((turns - 28.0 * kr / 80.0).abs() < 1e-12);
        let t = design_spiral_template(&fm, &stack, &d, &hw(3.2), 0.0, 80).unwrap();
        assert!((t.end_radius() - kr).abs() < 1e-9);
        t.validate(&hw(3.2)).unwrap();
    }

    #[test]
    fn variable_density_spiral_turns_concentrate_inside() {
        let fm = FovModel::new(28.0, 3.0).unwrap();
        let d = DensityParams::new(1.0, 1.5, 1.0).unwrap();
        let kr = 4.0;
        let inner = spiral_twist(&fm, &d, kr, 20, kr / 2.0);
        let outer = spiral_twist(&fm, &d, kr, 20, kr) - inner;
        assert!(inner > outer);
    }

    #[test]
    fn pole_plane_spiral_is_tiny_and_single() {
        let fm = FovModel::new(28.0, 3.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.15).unwrap();
        let stack = StackGeometry::new(&fm, &e, ResolutionRule::Coarsen);
        let d = DensityParams::default();
        let t = design_spiral_template(&fm, &stack, &d, &hw(3.2), e.k_z, 1).unwrap();
        assert!((t.end_radius() - (1.0 / 28.0f64).hypot(e.k_z)).abs() < 1e-9);
        assert!(t.k_samples.iter().all(|k| (k[2] - e.k_z).abs() < 1e-15));
        assert_eq!(estimate_spiral_interleaves(&fm, &stack, &d, &hw(3.2), e.k_z).unwrap(), 1);
    }

    #[test]
    fn spiral_counts_peak_at_equator() {
        let fm = FovModel::new(28.0, 3.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.15).unwrap();
        let stack = StackGeometry::new(&fm, &e, ResolutionRule::Coarsen);
        let d = DensityParams::default();
        let table = spiral_interleaf_table(&fm, &stack, &d, &hw(3.2), 9, &ProfileOptions::default()).unwrap();
        let y = table.ordinates();
        assert!(y.iter().all(|&v| v <= y[4]), "{y:?}");
        assert!(y[..5].windows(2).all(|w| w[0] <= w[1]));
    }
}
