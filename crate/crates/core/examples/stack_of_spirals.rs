//! Spherical stack of spirals matched to 360 readouts, with templates and weights.

use kspace::assembly::{synthesize, TemplatePolicy, TemplateSpec};
use kspace::dcf::stack_dcf;
use kspace::geometry::{DensityParams, ExtentModel, FovModel, ResolutionRule, StackGeometry};
use kspace::paths::{design_stack_path, discretize, match_readout_count, PathKind};
use kspace::templates::{spiral_interleaf_table, HardwareConfig, ProfileOptions};

fn main() -> kspace::Result<()> {
    let e = ExtentModel::from_resolution(0.12, 0.15)?;
    let d = DensityParams::default();
    let hw = HardwareConfig::clinical(3.2)?;

    let designer = |s: f64| {
        let fm = FovModel::new(28.0 * s, 3.0 * s)?;
        let stack = StackGeometry::new(&fm, &e, ResolutionRule::Coarsen);
        let n = spiral_interleaf_table(&fm, &stack, &d, &hw, 64, &ProfileOptions::default())?;
        design_stack_path(&fm, &e, &d, &n)
    };
    let (scale, path) = match_readout_count(designer, 360)?;
    println!("FOV scale {scale:.4}: n_real {:.3} -> {} readouts", path.n_real, path.count());

    let spec = TemplateSpec {
        kind: PathKind::Stack,
        fov: FovModel::new(28.0 * scale, 3.0 * scale)?,
        extent: e,
        density: d,
        hardware: hw,
        rule: ResolutionRule::Coarsen,
        policy: TemplatePolicy::PerReadout,
    };
    let traj = synthesize(&discretize(&path, 0.5)?, &path, &spec)?;
    let w = stack_dcf(&traj, &path)?;
    println!("{} planes, {} samples, weights sum {:.6}", traj.templates.len(), traj.sample_count(), w.total());
    for t in traj.templates.iter().step_by(traj.templates.len().div_ceil(8)) {
        println!(
            "  z {:+.3}  interleaves {:3}  {:.3} ms  max |g| {:.1} mT/m  max slew {:.1} mT/m/ms",
            t.surface.value(),
            t.twist_count,
            t.duration(),
            t.max_amplitude(),
            t.max_slew()
        );
    }
    Ok(())
}
