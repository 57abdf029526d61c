//! Hardware-limited readout templates: a spoke, a twisted cone and a spiral.

use std::f64::consts::FRAC_PI_4;

use kspace::geometry::{DensityParams, ExtentModel, FovModel, ResolutionRule, StackGeometry};
use kspace::templates::{
    design_cone_template, design_radial_spoke, design_spiral_template, estimate_cone_interleaves,
    estimate_spiral_interleaves, HardwareConfig, Template,
};

fn show(name: &str, t: &Template, hw: &HardwareConfig) {
    println!(
        "{name:8} {:4} samples  {:.3} ms  end |k| {:.3}  max |g| {:5.1}/{}  max slew {:6.1}/{}  k-g deviation {:.1e}",
        t.len(),
        t.duration(),
        t.end_radius(),
        t.max_amplitude(),
        hw.g_max,
        t.max_slew(),
        hw.s_max,
        t.integral_deviation()
    );
}

fn main() -> kspace::Result<()> {
    let fm = FovModel::new(28.0, 14.0)?;
    let e = ExtentModel::from_resolution(0.12, 0.12)?;
    let d = DensityParams::new(2.25, 1.0, 1.0)?;
    let hw = HardwareConfig::clinical(2.8)?;

    let spoke = design_radial_spoke(&e, &hw, FRAC_PI_4)?;
    show("spoke", &spoke, &hw);

    let n = estimate_cone_interleaves(&fm, &e, &d, &hw, FRAC_PI_4)?;
    let cone = design_cone_template(&fm, &e, &d, &hw, FRAC_PI_4, n)?;
    println!("cone at 45 deg needs {n} interleaves");
    show("cone", &cone, &hw);

    let hw = hw.with_t_read(3.2);
    let stack = StackGeometry::new(&fm, &e, ResolutionRule::Coarsen);
    let d = DensityParams::default();
    let n = estimate_spiral_interleaves(&fm, &stack, &d, &hw, 0.0)?;
    let spiral = design_spiral_template(&fm, &stack, &d, &hw, 0.0, n)?;
    println!("equatorial spiral needs {n} interleaves");
    show("spiral", &spiral, &hw);

    match design_cone_template(&fm, &e, &d, &hw.with_t_read(0.5), FRAC_PI_4, 4) {
        Err(err) => println!("0.5 ms cone with 4 interleaves: {err}"),
        Ok(_) => println!("0.5 ms cone with 4 interleaves fits"),
    }
    Ok(())
}
