//! One test per acceptance criterion. Each prints a `criterion N: PASS|FAIL`
//! line with the measured values before asserting.

use std::cell::Cell;
use std::io::Write;
use std::f64::consts::PI;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use kspace::analysis::{compute_psf, density_profile, sphere_uniformity, Axis, ProfileAxis};
use kspace::cli::{end_directions, random_directions};
use kspace::dcf::{radius_mask, relative_rms, voronoi_dcf_oracle};
use kspace::geometry::{
    extent_at, orthogonal_fov, vd_fov_z, DensityParams, ExtentModel, FovModel, ResolutionRule, StackGeometry,
};
use kspace::io::{DesignConfig, FovConfig, ResolutionConfig};
use kspace::numerics::SampledFunction;
use kspace::paths::{
    design_cones_path, design_radial_path, design_stack_path, discretize, match_readout_count, PathKind,
    SpiralPath,
};
use kspace::pipeline::{design, path_at_scale};
use kspace::templates::{
    design_cone_template, design_radial_spoke, design_spiral_template, estimate_cone_interleaves,
    estimate_spiral_interleaves, HardwareConfig, Template, PROTON_GAMMA_BAR,
};
use kspace::Error;

/// Written to the stderr handle directly so the line survives output capture.
fn say(line: String) {
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

fn verdict(n: &str, pass: bool, detail: String) {
    say(format!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" }));
    assert!(pass, "criterion {n}: {detail}");
}

fn config(kind: PathKind, l: (f64, f64), res_mm: (f64, f64)) -> DesignConfig {
    DesignConfig::new(
        kind,
        FovConfig { l_r: l.0, l_z: l.1 },
        ResolutionConfig { dx: res_mm.0, dz: res_mm.1 },
    )
}

/// L = 10 cm, K = 1.25 cm^-1 with short, coarsely rastered spokes.
fn desk_radial() -> DesignConfig {
    let mut c = config(PathKind::Radial, (10.0, 10.0), (4.0, 4.0));
    c.hardware.t_read_ms = 5.0;
    c.hardware.dt_us = 20.0;
    c
}

#[test]
fn c01_isotropic_radial_count() {
    let t = Instant::now();
    let p = design_radial_path(&FovModel::isotropic(10.0).unwrap(), &ExtentModel::isotropic(1.25).unwrap()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let want = 4.0 * PI * 1.25f64.powi(2) * 100.0;
    let err = (p.n_real / want - 1.0).abs();
    verdict(
        "1",
        err < 5e-3 && secs < 1.0,
        format!("n_real {:.3} vs {want:.3} (rel err {err:.1e}), {secs:.3} s", p.n_real),
    );
}

#[test]
fn c02_closed_form_polar_path() {
    let p = design_radial_path(&FovModel::isotropic(10.0).unwrap(), &ExtentModel::isotropic(1.25).unwrap()).unwrap();
    let worst = (0..=9800)
        .map(|i| 0.01 + 0.98 * i as f64 / 9800.0)
        .map(|u| (p.second_coord(u) - (1.0 - 2.0 * u).acos()).abs())
        .fold(0.0, f64::max);
    verdict("2", worst < 1e-3, format!("max |phi_p(u) - acos(1 - 2u)| = {worst:.2e} rad"));
}

#[test]
fn c03_anisotropic_radial_counts() {
    let t = Instant::now();
    let e = ExtentModel::from_resolution(0.12, 0.12).unwrap();
    let a = design_radial_path(&FovModel::new(28.0, 28.0).unwrap(), &e).unwrap();
    let b = design_radial_path(&FovModel::new(28.0, 14.0).unwrap(), &e).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let ea = (a.n_real / 171_042.27 - 1.0).abs();
    let eb = (b.n_real / 103_412.12 - 1.0).abs();
    verdict(
        "3",
        ea < 1e-3 && eb < 1e-3 && secs < 5.0,
        format!("n_real {:.2} (err {ea:.1e}), {:.2} (err {eb:.1e}), {secs:.2} s", a.n_real, b.n_real),
    );
}

fn table(a: f64, b: f64, values: &[f64]) -> SampledFunction {
    let n = values.len();
    let x = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    SampledFunction::new(x, values.to_vec()).unwrap()
}

/// Worst relative deviation of the three spacing identities over 1000
/// interior `u`, and of the rates from finite differences of the tables.
fn spacing_errors(p: &SpiralPath) -> (f64, f64) {
    let (fm, e, d) = (p.fov, p.extent, p.density);
    let mut worst: f64 = 0.0;
    let mut fd_worst: f64 = 0.0;
    for i in 0..1000 {
        let u = (i as f64 + 0.5) / 1000.0;
        let (df, dtheta) = p.rates(u);
        let f = p.second_coord(u);
        let r = match p.kind {
            PathKind::Radial => 2.0 * PI / dtheta * df * extent_at(&e, f) * orthogonal_fov(&fm, f),
            PathKind::Cones => {
                let g = extent_at(&e, f) * p.interleaves.as_ref().unwrap().eval(f) * orthogonal_fov(&fm, f);
                dtheta * g / (2.0 * PI * p.n_real * extent_at(&e, f) * orthogonal_fov(&fm, f))
            }
            PathKind::Stack => 2.0 * PI / dtheta * df * vd_fov_z(&fm, &d, f, e.k_z),
        };
        worst = worst.max((r - 1.0).abs());
        if i % 50 == 25 {
            let h = 1e-5;
            let fd = (p.second_coord(u + h) - p.second_coord(u - h)) / (2.0 * h);
            fd_worst = fd_worst.max((fd / df - 1.0).abs());
        }
    }
    (worst, fd_worst)
}

#[test]
fn c04_spacing_identities() {
    let mut runner = TestRunner::new(Config {
        cases: 50,
        failure_persistence: None,
        ..Config::default()
    });
    let worst = Cell::new([0.0f64; 6]);
    let strategy = (
        8.0f64..40.0,
        0.1f64..1.5,
        0.3f64..3.0,
        0.5f64..2.0,
        1.0f64..3.0,
        prop::collection::vec(1.0f64..60.0, 2..12),
    );
    let result = runner.run(&strategy, |(l_r, l_ratio, k_r, k_ratio, alpha_z, counts)| {
        let fm = FovModel::new(l_r, l_r * l_ratio).unwrap();
        let e = ExtentModel::new(k_r, k_r * k_ratio).unwrap();
        let d = DensityParams::new(1.0, 1.0, alpha_z).unwrap();
        let radial = design_radial_path(&fm, &e).unwrap();
        let cones = design_cones_path(&fm, &e, &table(0.0, PI, &counts)).unwrap();
        let stack = design_stack_path(&fm, &e, &d, &table(-e.k_z, e.k_z, &counts)).unwrap();
        let mut w = worst.get();
        for (i, p) in [&radial, &cones, &stack].into_iter().enumerate() {
            let (id, fd) = spacing_errors(p);
            w[2 * i] = w[2 * i].max(id);
            w[2 * i + 1] = w[2 * i + 1].max(fd);
            prop_assert!(id < 1e-6 && fd < 1e-2, "{} identity {id:.1e} finite difference {fd:.1e}", p.kind);
        }
        worst.set(w);
        Ok(())
    });
    let w = worst.get();
    verdict(
        "4",
        result.is_ok(),
        format!(
            "50 random configs, worst identity/finite-difference error: radial {:.1e}/{:.1e}, cones {:.1e}/{:.1e}, stack {:.1e}/{:.1e}{}",
            w[0],
            w[1],
            w[2],
            w[3],
            w[4],
            w[5],
            result.err().map(|e| format!("; {e}")).unwrap_or_default()
        ),
    );
}

#[test]
fn c05_sample_density_law() {
    let e = ExtentModel::from_resolution(0.12, 0.12).unwrap();
    let p = design_radial_path(&FovModel::new(28.0, 14.0).unwrap(), &e).unwrap();
    let d = discretize(&p, 0.5).unwrap();
    let bins = 200;
    let mut hist = vec![0usize; bins];
    for &(_, phi) in &d.angles {
        hist[((phi / PI * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let l1: f64 = (0..bins)
        .map(|b| {
            let (a, c) = (PI * b as f64 / bins as f64, PI * (b + 1) as f64 / bins as f64);
            let model = p.u_of_coord(c) - p.u_of_coord(a);
            (hist[b] as f64 / d.count as f64 - model).abs()
        })
        .sum();
    verdict("5", d.count >= 10_000 && l1 < 0.02, format!("N = {}, L1 = {l1:.2e} over {bins} bins", d.count));
}

#[test]
fn c06_dcf_matches_voronoi_oracle() {
    let mut stack = config(PathKind::Stack, (10.0, 10.0), (4.0, 4.0));
    stack.hardware.t_read_ms = 4.0;
    stack.hardware.dt_us = 20.0;
    let mut lines = Vec::new();
    let mut pass = true;
    for cfg in [desk_radial(), stack] {
        let t = Instant::now();
        let d = design(&cfg).unwrap();
        let n = d.trajectory.sample_count();
        let oracle = voronoi_dcf_oracle(&d.trajectory, 300 * n, 11).unwrap();
        let mask = radius_mask(&d.trajectory, 0.2, 0.9);
        let rms = relative_rms(&d.dcf.flat(), &oracle.flat(), &mask);
        let secs = t.elapsed().as_secs_f64();
        pass &= rms < 0.10 && secs < 120.0;
        lines.push(format!("{} ({} readouts, {n} samples) rms {:.2}% in {secs:.1} s", cfg.kind, d.path.count(), 100.0 * rms));
    }
    verdict("6", pass, lines.join("; "));
}

#[test]
fn c07_sphere_uniformity() {
    let mut cfg = config(PathKind::Radial, (10.0, 10.0), (4.0, 4.0));
    cfg.hardware.t_read_ms = 5.0;
    let d = design(&cfg).unwrap();
    let dirs = end_directions(&d);
    let mc = 300 * dirs.len();
    let a = sphere_uniformity(&dirs, mc, 3).unwrap();
    let b = sphere_uniformity(&random_directions(dirs.len(), 4), mc, 3).unwrap();
    verdict(
        "7",
        a.excluding_caps.cv < 0.15 && a.excluding_caps.cv < b.excluding_caps.cv,
        format!(
            "{} spokes: CV {:.3} (caps excluded) vs random {:.3}",
            dirs.len(),
            a.excluding_caps.cv,
            b.excluding_caps.cv
        ),
    );
}

#[test]
fn c08a_isotropic_psf_fwhm() {
    let t = Instant::now();
    let d = design(&desk_radial()).unwrap();
    let psf = compute_psf(&d.trajectory, &d.dcf, [96; 3], [12.0; 3]).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let delta = 0.4;
    let w: Vec<f64> = [Axis::X, Axis::Y, Axis::Z].iter().map(|&a| psf.fwhm(a).unwrap()).collect();
    let worst = w.iter().map(|x| (x / delta - 1.0).abs()).fold(0.0, f64::max);
    verdict(
        "8a",
        worst < 0.2 && secs < 120.0,
        format!(
            "FWHM x/y/z {:.3}/{:.3}/{:.3} cm vs delta {delta} cm (worst {:.0}% off), {secs:.1} s",
            w[0],
            w[1],
            w[2],
            100.0 * worst
        ),
    );
}

#[test]
fn c08b_anisotropic_aliasing_position() {
    let t = Instant::now();
    let mut cfg = config(PathKind::Radial, (8.0, 4.0), (8.0, 8.0));
    cfg.hardware.t_read_ms = 5.0;
    cfg.hardware.dt_us = 10.0;
    let d = design(&cfg).unwrap();
    let psf = compute_psf(&d.trajectory, &d.dcf, [96; 3], [12.0; 3]).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let fw = psf.fwhm(Axis::Z).unwrap();
    let onset = psf.aliasing_onset(Axis::Z, 20.0, 2.0 * fw).unwrap();
    let (l_r, l_z) = (8.0, 4.0);
    verdict(
        "8b",
        (onset / l_z - 1.0).abs() < 0.15 && (onset - l_z).abs() < (onset - l_r).abs() && secs < 120.0,
        format!("first z aliasing at {onset:.3} cm (L_z {l_z}, L_r {l_r}), {secs:.1} s"),
    );
}

#[test]
fn c09_variable_density() {
    let mut stack = config(PathKind::Stack, (28.0, 3.0), (1.2, 1.5));
    stack.hardware.t_read_ms = 3.2;
    stack.density.alpha_z = 2.5;
    let p = path_at_scale(&stack, 1.0).unwrap();
    let z: Vec<f64> = discretize(&p, 0.5).unwrap().angles.iter().map(|a| a.1).collect();
    let z_clamp = 0.5 / p.fov.l_z;
    // spacing between consecutive planes, ordered from the equator outward
    let mut monotone = true;
    for side in [1.0, -1.0] {
        let mut out: Vec<f64> = z.iter().map(|v| v * side).filter(|&v| v > z_clamp).collect();
        out.sort_by(f64::total_cmp);
        let gaps: Vec<f64> = out.windows(2).map(|w| w[1] - w[0]).collect();
        monotone &= gaps.windows(2).all(|g| g[1] >= g[0] * (1.0 - 1e-9));
    }

    let mut cones = config(PathKind::Cones, (28.0, 14.0), (4.4, 4.4));
    cones.density.alpha = 2.25;
    let d = design(&cones).unwrap();
    let shells = density_profile(&d.trajectory, None, ProfileAxis::Radius, 10).unwrap().shell_density();
    let ratio = shells[0] / shells[9];
    verdict(
        "9",
        monotone && ratio > 2.0,
        format!(
            "stack alpha_z 2.5: {} planes, spacing nondecreasing outward: {monotone}; cones alpha 2.25 center/edge density {ratio:.1}",
            z.len()
        ),
    );
}

#[test]
fn c10_readout_count_matching() {
    let mut inav = config(PathKind::Cones, (28.0, 14.0), (4.4, 4.4));
    inav.density.alpha = 2.25;
    let mut stack = config(PathKind::Stack, (28.0, 3.0), (1.2, 1.5));
    stack.hardware.t_read_ms = 3.2;
    let mut lines = Vec::new();
    let mut pass = true;
    for (cfg, target) in [(inav, 32u64), (stack, 360)] {
        let calls = Cell::new(0usize);
        let (s, p) = match_readout_count(
            |s| {
                calls.set(calls.get() + 1);
                path_at_scale(&cfg, s)
            },
            target,
        )
        .unwrap();
        pass &= p.count() == target && calls.get() < 60;
        lines.push(format!("{} target {target}: count {} at scale {s:.4} after {} probes", cfg.kind, p.count(), calls.get()));
    }
    verdict("10", pass, lines.join("; "));
}

#[derive(Debug, Clone)]
struct HwCase {
    kind: u8,
    l_r: f64,
    l_ratio: f64,
    dx_mm: f64,
    dz_mm: f64,
    t_read: f64,
    dt_us: f64,
    g_max: f64,
    s_max: f64,
    alpha: f64,
    at: f64,
}

fn hw_case() -> impl Strategy<Value = HwCase> {
    (
        (0u8..3, 10.0f64..32.0, 0.2f64..1.0, 1.5f64..6.0, 1.5f64..6.0),
        (1.5f64..6.0, prop::sample::select(vec![2.0, 4.0, 10.0]), 20.0f64..80.0, 80.0f64..220.0),
        (1.0f64..3.0, 0.0f64..1.0),
    )
        .prop_map(|((kind, l_r, l_ratio, dx_mm, dz_mm), (t_read, dt_us, g_max, s_max), (alpha, at))| HwCase {
            kind,
            l_r,
            l_ratio,
            dx_mm,
            dz_mm,
            t_read,
            dt_us,
            g_max,
            s_max,
            alpha,
            at,
        })
}

fn design_case(c: &HwCase) -> Result<(Template, HardwareConfig), Error> {
    let fm = FovModel::new(c.l_r, c.l_r * c.l_ratio)?;
    let e = ExtentModel::from_resolution(0.1 * c.dx_mm, 0.1 * c.dz_mm)?;
    let hw = HardwareConfig::new(c.g_max, c.s_max, 1e-3 * c.dt_us, PROTON_GAMMA_BAR, c.t_read)?;
    let t = match c.kind {
        0 => design_radial_spoke(&e, &hw, c.at * PI)?,
        1 => {
            let d = DensityParams::new(c.alpha, 1.0, 1.0)?;
            let phi = c.at * PI;
            let n = estimate_cone_interleaves(&fm, &e, &d, &hw, phi)?;
            design_cone_template(&fm, &e, &d, &hw, phi, n)?
        }
        _ => {
            let d = DensityParams::new(1.0, c.alpha, 1.0)?;
            let stack = StackGeometry::new(&fm, &e, ResolutionRule::Coarsen);
            let z = (2.0 * c.at - 1.0) * 0.95 * e.k_z;
            let n = estimate_spiral_interleaves(&fm, &stack, &d, &hw, z)?;
            design_spiral_template(&fm, &stack, &d, &hw, z, n)?
        }
    };
    Ok((t, hw))
}

#[test]
fn c11_hardware_limits() {
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        max_global_rejects: 4096,
        ..Config::default()
    });
    let worst = Cell::new([0.0f64; 3]);
    let infeasible = Cell::new(0usize);
    let result = runner.run(&hw_case(), |c| {
        let (t, hw) = match design_case(&c) {
            Err(Error::Infeasible { .. }) => {
                infeasible.set(infeasible.get() + 1);
                return Err(TestCaseError::reject("infeasible"));
            }
            r => r.unwrap(),
        };
        let (g, s, dev) = (t.max_amplitude(), t.max_slew(), t.integral_deviation());
        let mut w = worst.get();
        w[0] = w[0].max(g / hw.g_max);
        w[1] = w[1].max(s / hw.s_max);
        w[2] = w[2].max(t.duration() / hw.t_read);
        worst.set(w);
        prop_assert!(g <= hw.g_max * (1.0 + 1e-9), "|g| {g} > {}", hw.g_max);
        prop_assert!(s <= hw.s_max * (1.0 + 1e-9), "slew {s} > {}", hw.s_max);
        prop_assert!(dev < 1e-6, "k-g deviation {dev:.1e}");
        prop_assert!(t.duration() <= hw.t_read + 1e-12, "duration {} > {}", t.duration(), hw.t_read);
        prop_assert!(t.validate(&hw).is_ok());
        Ok(())
    });
    let w = worst.get();
    verdict(
        "11",
        result.is_ok(),
        format!(
            "100 feasible random templates ({} infeasible draws rejected), worst |g|/g_max {:.4}, slew/s_max {:.4}, duration/t_read {:.4}{}",
            infeasible.get(),
            w[0],
            w[1],
            w[2],
            result.err().map(|e| format!("; {e}")).unwrap_or_default()
        ),
    );
}

#[test]
fn c12_cones_count_sanity_log() {
    let mut cfg = config(PathKind::Cones, (28.0, 14.0), (1.2, 1.2));
    cfg.hardware.t_read_ms = 2.8;
    let p = path_at_scale(&cfg, 1.0).unwrap();
    let dev = p.n_real / 8862.0 - 1.0;
    say(format!(
        "criterion 12: LOG fully sampled cones count {} vs 8862 ({:+.1}%, {} the +-15% sanity range; not a gate)",
        p.count(),
        100.0 * dev,
        if dev.abs() <= 0.15 { "inside" } else { "outside" }
    ));
}
