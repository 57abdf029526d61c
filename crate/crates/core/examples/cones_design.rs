//! Variable-density 3D cones: interleaf table, path and a matched readout count.

use kspace::geometry::{DensityParams, ExtentModel, FovModel};
use kspace::paths::{design_cones_path_with, discretize, match_readout_count};
use kspace::templates::{cone_interleaf_table, HardwareConfig, ProfileOptions};

fn main() -> kspace::Result<()> {
    let e = ExtentModel::from_resolution(0.44, 0.44)?;
    let d = DensityParams::new(2.25, 1.0, 1.0)?;
    let hw = HardwareConfig::clinical(2.8)?;
    let opts = ProfileOptions::default();

    let designer = |s: f64| {
        let fm = FovModel::new(28.0 * s, 14.0 * s)?;
        let n = cone_interleaf_table(&fm, &e, &d, &hw, 64, &opts)?;
        design_cones_path_with(&fm, &e, &n, &d, &Default::default())
    };

    let full = designer(1.0)?;
    let table = full.interleaves.as_ref().unwrap();
    println!("fully sampled: n_real {:.1}, {} readouts", full.n_real, full.count());
    println!("interleaves per cone, by polar angle:");
    for (phi, n) in table.abscissae().iter().zip(table.ordinates()).step_by(4).take(9) {
        println!("  {:5.1} deg  {n}", phi.to_degrees());
    }

    let (scale, path) = match_readout_count(designer, 32)?;
    let dp = discretize(&path, 0.5)?;
    println!("32 readouts at FOV scale {scale:.4} (n_real {:.3})", path.n_real);
    for (theta, phi) in dp.angles.iter().step_by(8) {
        println!("  theta {:8.3}  phi {:6.3}", theta, phi);
    }
    Ok(())
}
