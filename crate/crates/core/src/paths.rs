//! Continuous spiral paths on the extent ellipsoid (radial, cones) and on the
//! stack cylinder, their discretization at `du = 1 / N`, and readout-count
//! matching by a search over FOV scale.
//!
//! Each path solves `df/du = N / g(f)` for its second coordinate `f` (polar
//! angle or plane height) and carries the azimuth as a cumulative integral
//! over `f`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{extent_at, orthogonal_fov, vd_fov_z, DensityParams, ExtentModel, FovModel};
use crate::numerics::{solve_cdf_ode_with, CdfSolution, NumericsConfig, SampledFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Radial,
    Cones,
    Stack,
}

impl PathKind {
    pub fn name(&self) -> &'static str {
        match self {
            PathKind::Radial => "radial",
            PathKind::Cones => "cones",
            PathKind::Stack => "stack",
        }
    }
}

impl std::fmt::Display for PathKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parametric spiral path `(theta_p(u), f_p(u))`, `u in (0, 1)`.
#[derive(Debug, Clone)]
pub struct SpiralPath {
    pub kind: PathKind,
    /// Readout count before rounding, `N = int g`.
    pub n_real: f64,
    pub fov: FovModel,
    pub extent: ExtentModel,
    pub density: DensityParams,
    /// Interleaf counts per surface, for cones and stack paths.
    pub interleaves: Option<SampledFunction>,
    cdf: CdfSolution,
    /// `g(f)` on the solver grid.
    g: SampledFunction,
    /// `d theta / d f` on the solver grid.
    theta_rate: SampledFunction,
    /// `theta(f)`, the cumulative integral of `theta_rate`.
    theta_cum: SampledFunction,
}

impl SpiralPath {
    #[allow(clippy::too_many_arguments)]
    fn build(
        kind: PathKind,
        fov: FovModel,
        extent: ExtentModel,
        density: DensityParams,
        interleaves: Option<SampledFunction>,
        range: (f64, f64),
        g_fn: impl Fn(f64) -> f64,
        theta_rate_fn: impl Fn(f64) -> f64,
        cfg: &NumericsConfig,
    ) -> Result<Self> {
        let (a, b) = range;
        let g = SampledFunction::from_fn(a, b, cfg.grid_points, g_fn)?;
        let cdf = solve_cdf_ode_with(&g, a, b, cfg)?;
        let theta_rate = SampledFunction::from_fn(a, b, cfg.grid_points, theta_rate_fn)?;
        let x = theta_rate.abscissae();
        let r = theta_rate.ordinates();
        let mut cum = Vec::with_capacity(x.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for j in 1..x.len() {
            acc += 0.5 * (x[j] - x[j - 1]) * (r[j] + r[j - 1]);
            cum.push(acc);
        }
        let theta_cum = SampledFunction::new(x.to_vec(), cum)?;
        Ok(Self {
            kind,
            n_real: cdf.n_total,
            fov,
            extent,
            density,
            interleaves,
            cdf,
            g,
            theta_rate,
            theta_cum,
        })
    }

    /// Range of the second coordinate.
    pub fn coord_range(&self) -> (f64, f64) {
        (self.cdf.f_min, self.cdf.f_max)
    }

    /// `phi_p(u)` for ellipsoid paths, `z_p(u)` for the stack.
    pub fn second_coord(&self, u: f64) -> f64 {
        self.cdf.f_of_u.eval(u)
    }

    pub fn theta_p(&self, u: f64) -> f64 {
        self.theta_cum.eval(self.second_coord(u))
    }

    /// Denominator of the second-coordinate ODE at `u`.
    pub fn g_denominator(&self, u: f64) -> f64 {
        self.g.eval(self.second_coord(u))
    }

    /// `g` as a function of the second coordinate.
    pub fn g_of_coord(&self, f: f64) -> f64 {
        self.g.eval(f)
    }

    /// `u(f)`, the normalized cumulative density.
    pub fn u_of_coord(&self, f: f64) -> f64 {
        self.cdf.u_of_f.eval(f)
    }

    /// `g(f)` evaluated from the design laws rather than the solver table.
    pub fn g_exact(&self, f: f64) -> f64 {
        let (fm, e) = (&self.fov, &self.extent);
        match self.kind {
            PathKind::Radial => radial_g(fm, e, f),
            PathKind::Cones => extent_at(e, f) * self.interleaves_at(f) * orthogonal_fov(fm, f),
            PathKind::Stack => self.interleaves_at(f) * vd_fov_z(fm, &self.density, f, e.k_z),
        }
    }

    /// `d theta / d f` evaluated from the design laws.
    pub fn theta_rate_exact(&self, f: f64) -> f64 {
        let (fm, e) = (&self.fov, &self.extent);
        match self.kind {
            PathKind::Radial | PathKind::Cones => ellipsoid_theta_rate(fm, e, f),
            PathKind::Stack => 2.0 * PI * vd_fov_z(fm, &self.density, f, e.k_z),
        }
    }

    /// `(d f_p / du, d theta_p / du)` at `u`.
    pub fn rates(&self, u: f64) -> (f64, f64) {
        let f = self.second_coord(u);
        let df = self.n_real / self.g_exact(f);
        (df, self.theta_rate_exact(f) * df)
    }

    /// Tabulated `d theta / d f` used for the azimuth integral.
    pub fn theta_rate_table(&self) -> &SampledFunction {
        &self.theta_rate
    }

    /// `f_p(u)` as a tabulated function of `u`.
    pub fn second_coord_table(&self) -> &SampledFunction {
        &self.cdf.f_of_u
    }

    /// `theta_p(u)` tabulated on `points` uniform values of `u`.
    pub fn theta_table(&self, points: usize) -> Result<SampledFunction> {
        SampledFunction::from_fn(0.0, 1.0, points, |u| self.theta_p(u))
    }

    /// `g(f_p(u))` tabulated on `points` uniform values of `u`.
    pub fn g_denominator_table(&self, points: usize) -> Result<SampledFunction> {
        SampledFunction::from_fn(0.0, 1.0, points, |u| self.g_denominator(u))
    }

    /// Readout count after round-half-up.
    pub fn count(&self) -> u64 {
        round_half_up(self.n_real)
    }

    /// Interleaf count on the surface at `f`, interpolated.
    pub fn interleaves_at(&self, f: f64) -> f64 {
        self.interleaves.as_ref().map(|n| n.eval(f)).unwrap_or(1.0)
    }
}

fn radial_g(fm: &FovModel, e: &ExtentModel, phi: f64) -> f64 {
    2.0 * PI * fm.l_r * orthogonal_fov(fm, phi) * extent_at(e, phi).powi(2) * phi.sin()
}

fn ellipsoid_theta_rate(fm: &FovModel, e: &ExtentModel, phi: f64) -> f64 {
    2.0 * PI * extent_at(e, phi) * orthogonal_fov(fm, phi)
}

pub(crate) fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor().max(0.0) as u64
}

fn check_counts(n: &SampledFunction, a: f64, b: f64) -> Result<()> {
    let (lo, hi) = n.domain();
    if lo > a + 1e-12 * (b - a).abs() || hi < b - 1e-12 * (b - a).abs() {
        return Err(Error::invalid(format!(
            "interleaf table covers [{lo}, {hi}], path needs [{a}, {b}]"
        )));
    }
    if let Some(v) = n.ordinates().iter().find(|v| !(**v > 0.0)) {
        return Err(Error::invalid(format!("interleaf counts must be positive (found {v})")));
    }
    Ok(())
}

pub fn design_radial_path(fm: &FovModel, e: &ExtentModel) -> Result<SpiralPath> {
    design_radial_path_with(fm, e, &NumericsConfig::default())
}

pub fn design_radial_path_with(fm: &FovModel, e: &ExtentModel, cfg: &NumericsConfig) -> Result<SpiralPath> {
    let (fm, e) = (*fm, *e);
    SpiralPath::build(
        PathKind::Radial,
        fm,
        e,
        DensityParams::default(),
        None,
        (0.0, PI),
        |phi| radial_g(&fm, &e, phi),
        |phi| ellipsoid_theta_rate(&fm, &e, phi),
        cfg,
    )
}

pub fn design_cones_path(fm: &FovModel, e: &ExtentModel, n_of_phi: &SampledFunction) -> Result<SpiralPath> {
    design_cones_path_with(fm, e, n_of_phi, &DensityParams::default(), &NumericsConfig::default())
}

/// Cones path; `d` is recorded for the templates and does not enter `g`.
pub fn design_cones_path_with(
    fm: &FovModel,
    e: &ExtentModel,
    n_of_phi: &SampledFunction,
    d: &DensityParams,
    cfg: &NumericsConfig,
) -> Result<SpiralPath> {
    check_counts(n_of_phi, 0.0, PI)?;
    let (fm, e) = (*fm, *e);
    SpiralPath::build(
        PathKind::Cones,
        fm,
        e,
        *d,
        Some(n_of_phi.clone()),
        (0.0, PI),
        |phi| extent_at(&e, phi) * n_of_phi.eval(phi) * orthogonal_fov(&fm, phi),
        |phi| ellipsoid_theta_rate(&fm, &e, phi),
        cfg,
    )
}

pub fn design_stack_path(
    fm: &FovModel,
    e: &ExtentModel,
    d: &DensityParams,
    n_of_z: &SampledFunction,
) -> Result<SpiralPath> {
    design_stack_path_with(fm, e, d, n_of_z, &NumericsConfig::default())
}

pub fn design_stack_path_with(
    fm: &FovModel,
    e: &ExtentModel,
    d: &DensityParams,
    n_of_z: &SampledFunction,
    cfg: &NumericsConfig,
) -> Result<SpiralPath> {
    d.validate()?;
    let kz = e.k_z;
    check_counts(n_of_z, -kz, kz)?;
    let (fm, e, dd) = (*fm, *e, *d);
    SpiralPath::build(
        PathKind::Stack,
        fm,
        e,
        dd,
        Some(n_of_z.clone()),
        (-kz, kz),
        |z| n_of_z.eval(z) * vd_fov_z(&fm, &dd, z, kz),
        |z| 2.0 * PI * vd_fov_z(&fm, &dd, z, kz),
        cfg,
    )
}

/// Readout positions along a path: `(theta_i, f_i)` at `u = (i + offset) / count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedPath {
    pub kind: PathKind,
    pub count: usize,
    pub offset: f64,
    pub angles: Vec<(f64, f64)>,
}

pub const DEFAULT_OFFSET: f64 = 0.5;

pub fn discretize(path: &SpiralPath, offset: f64) -> Result<DiscretizedPath> {
    if !(0.0..1.0).contains(&offset) {
        return Err(Error::invalid(format!("offset must lie in [0, 1) (got {offset})")));
    }
    let count = path.count() as usize;
    if count < 1 {
        return Err(Error::invalid(format!(
            "path holds {} readouts; at least one is needed",
            path.n_real
        )));
    }
    let angles = (0..count)
        .map(|i| {
            let u = (i as f64 + offset) / count as f64;
            (path.theta_p(u), path.second_coord(u))
        })
        .collect();
    Ok(DiscretizedPath {
        kind: path.kind,
        count,
        offset,
        angles,
    })
}

pub const SCALE_BOUNDS: (f64, f64) = (1e-3, 1e3);
pub const MAX_SEARCH_ITERATIONS: usize = 60;

/// Finds a FOV scale `s` whose path rounds to `target` readouts.
///
/// `designer(s)` must build the path for FOVs scaled by `s`, with `N`
/// increasing in `s`. The search bisects `log s` over [`SCALE_BOUNDS`]; its
/// first probe is `s = 1`.
pub fn match_readout_count<F>(designer: F, target: u64) -> Result<(f64, SpiralPath)>
where
    F: Fn(f64) -> Result<SpiralPath>,
{
    if target < 1 {
        return Err(Error::invalid("target readout count must be at least 1"));
    }
    let t = target as f64;
    let (mut lo, mut hi) = (SCALE_BOUNDS.0.ln(), SCALE_BOUNDS.1.ln());
    for _ in 0..MAX_SEARCH_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let s = mid.exp();
        let path = designer(s)?;
        if path.n_real >= t - 0.5 && path.n_real < t + 0.5 {
            return Ok((s, path));
        }
        if path.n_real < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::SearchFailure(format!(
        "no FOV scale in [{}, {}] gives {target} readouts",
        SCALE_BOUNDS.0, SCALE_BOUNDS.1
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fov_at;

    fn iso() -> SpiralPath {
        design_radial_path(&FovModel::isotropic(10.0).unwrap(), &ExtentModel::isotropic(1.25).unwrap()).unwrap()
    }

    #[test]
    fn isotropic_radial_count_and_closed_form() {
        let p = iso();
        let exact = 4.0 * PI * 1.25f64.powi(2) * 100.0;
        assert!((p.n_real - exact).abs() / exact < 1e-6, "{}", p.n_real);
        assert_eq!(p.count(), 1963);
        for i in 1..100 {
            let u = i as f64 / 100.0;
            assert!((p.second_coord(u) - (1.0 - 2.0 * u).acos()).abs() < 1e-4);
        }
    }

    #[test]
    fn anisotropic_radial_counts() {
        let e = ExtentModel::from_resolution(0.12, 0.12).unwrap();
        let a = design_radial_path(&FovModel::new(28.0, 28.0).unwrap(), &e).unwrap();
        let b = design_radial_path(&FovModel::new(28.0, 14.0).unwrap(), &e).unwrap();
        assert!((a.n_real / 171_042.27 - 1.0).abs() < 1e-3, "{}", a.n_real);
        assert!((b.n_real / 103_412.12 - 1.0).abs() < 1e-3, "{}", b.n_real);
    }

    #[test]
    fn radial_spacing_identity() {
        let fm = FovModel::new(24.0, 15.0).unwrap();
        let e = ExtentModel::new(1.7, 2.3).unwrap();
        let p = design_radial_path(&fm, &e).unwrap();
        for i in 1..200 {
            let u = i as f64 / 200.0;
            let (dphi, dtheta) = p.rates(u);
            let phi = p.second_coord(u);
            let lhs = 2.0 * PI / dtheta * dphi * extent_at(&e, phi) * orthogonal_fov(&fm, phi);
            assert!((lhs - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_interleaf_cones_count() {
        let fm = FovModel::new(20.0, 12.0).unwrap();
        let e = ExtentModel::new(1.0, 1.5).unwrap();
        let ones = SampledFunction::from_fn(0.0, PI, 8, |_| 1.0).unwrap();
        let p = design_cones_path(&fm, &e, &ones).unwrap();
        let n = 200_000;
        let h = PI / n as f64;
        let simpson: f64 = (0..n)
            .map(|j| {
                let f = |x: f64| extent_at(&e, x) * orthogonal_fov(&fm, x);
                let a = j as f64 * h;
                h / 6.0 * (f(a) + 4.0 * f(a + h / 2.0) + f(a + h))
            })
            .sum();
        assert!((p.n_real / simpson - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_cones_turns_and_linear_path() {
        let fm = FovModel::isotropic(10.0).unwrap();
        let e = ExtentModel::isotropic(1.25).unwrap();
        let n = SampledFunction::from_fn(0.0, PI, 8, |_| 5.0).unwrap();
        let p = design_cones_path(&fm, &e, &n).unwrap();
        let turns = (p.theta_p(1.0) - p.theta_p(0.0)) / (2.0 * PI);
        assert!((turns - p.n_real / 5.0).abs() < 1e-6 * turns);
        for i in 0..=10 {
            let u = i as f64 / 10.0;
            assert!((p.second_coord(u) - PI * u).abs() < 1e-9);
        }
    }

    #[test]
    fn stack_constant_product() {
        let fm = FovModel::new(28.0, 3.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.15).unwrap();
        let n = SampledFunction::from_fn(-e.k_z, e.k_z, 8, |_| 20.0).unwrap();
        let p = design_stack_path(&fm, &e, &DensityParams::default(), &n).unwrap();
        assert!((p.n_real - 400.0).abs() < 1e-9);
        assert_eq!(p.count(), 400);
        let d = discretize(&p, 0.5).unwrap();
        let dz: Vec<f64> = d.angles.windows(2).map(|w| w[1].1 - w[0].1).collect();
        // 20 readouts per plane spacing 1/L_z
        for s in dz {
            assert!((s * 20.0 - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn stack_quantile_positions() {
        let fm = FovModel::new(10.0, 2.0).unwrap();
        let e = ExtentModel::new(1.0, 1.0).unwrap();
        let n = SampledFunction::from_fn(-1.0, 1.0, 4, |_| 1.0).unwrap();
        let p = design_stack_path(&fm, &e, &DensityParams::default(), &n).unwrap();
        assert_eq!(p.count(), 4);
        let d = discretize(&p, 0.5).unwrap();
        let z: Vec<f64> = d.angles.iter().map(|a| a.1).collect();
        for (zi, want) in z.iter().zip([-0.75, -0.25, 0.25, 0.75]) {
            assert!((zi - want).abs() < 1e-9);
        }
    }

    #[test]
    fn stack_spacing_identity_with_density() {
        let fm = FovModel::new(28.0, 3.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.15).unwrap();
        let d = DensityParams::new(1.0, 1.0, 2.5).unwrap();
        let n = SampledFunction::from_fn(-e.k_z, e.k_z, 9, |z| 20.0 - 10.0 * (z / e.k_z).abs()).unwrap();
        let p = design_stack_path(&fm, &e, &d, &n).unwrap();
        for i in 1..100 {
            let u = i as f64 / 100.0;
            let (dz, dtheta) = p.rates(u);
            let z = p.second_coord(u);
            let lhs = 2.0 * PI / dtheta * dz * vd_fov_z(&fm, &d, z, e.k_z);
            assert!((lhs - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tabulated_azimuth_matches_rates() {
        let fm = FovModel::new(28.0, 3.0).unwrap();
        let e = ExtentModel::from_resolution(0.12, 0.15).unwrap();
        let d = DensityParams::new(1.0, 1.0, 2.5).unwrap();
        let n = SampledFunction::from_fn(-e.k_z, e.k_z, 9, |z| 20.0 - 10.0 * (z / e.k_z).abs()).unwrap();
        let p = design_stack_path(&fm, &e, &d, &n).unwrap();
        let h = 1e-4;
        for i in 1..50 {
            let u = i as f64 / 50.0 + 0.003;
            let fd = (p.theta_p(u + h) - p.theta_p(u - h)) / (2.0 * h);
            let (_, dtheta) = p.rates(u);
            assert!((fd / dtheta - 1.0).abs() < 1e-3, "{u}: {fd} vs {dtheta}");
        }
    }

    #[test]
    fn discretize_rounds_and_offsets() {
        let p = iso();
        let a = discretize(&p, 0.5).unwrap();
        let b = discretize(&p, 0.0).unwrap();
        assert_eq!(a.count, b.count);
        assert_eq!(b.angles[0].1, 0.0);
        assert!(discretize(&p, 1.0).is_err());
        assert_eq!(round_half_up(1963.5), 1964);
        assert_eq!(round_half_up(1963.4999), 1963);
    }

    #[test]
    fn readout_matching() {
        let e = ExtentModel::isotropic(1.25).unwrap();
        let base = FovModel::isotropic(10.0).unwrap();
        let designer = |s: f64| design_radial_path(&base.scaled(s)?, &e);
        let (s, p) = match_readout_count(designer, 1963).unwrap();
        assert_eq!(s, 1.0);
        assert_eq!(p.count(), 1963);
        let (s, p) = match_readout_count(designer, 982).unwrap();
        assert_eq!(p.count(), 982);
        assert!((s - 0.5f64.sqrt()).abs() < 1e-3);
        assert!(matches!(
            match_readout_count(designer, u64::MAX / 2),
            Err(Error::SearchFailure(_))
        ));
    }

    #[test]
    fn fov_at_is_used_only_for_l_theta() {
        // the orthogonal FOV of the equator is L_z
        let fm = FovModel::new(28.0, 14.0).unwrap();
        assert_eq!(orthogonal_fov(&fm, PI / 2.0), fov_at(&fm, 0.0));
    }
}
