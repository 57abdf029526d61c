//! How evenly the radial spoke directions cover the sphere.

use kspace::analysis::sphere_uniformity;
use kspace::cli::random_directions;
use kspace::geometry::{ExtentModel, FovModel};
use kspace::paths::{design_radial_path, discretize};

fn main() -> kspace::Result<()> {
    let path = design_radial_path(&FovModel::isotropic(10.0)?, &ExtentModel::isotropic(1.25)?)?;
    let dirs: Vec<[f64; 3]> = discretize(&path, 0.5)?
        .angles
        .iter()
        .map(|&(theta, phi)| [phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()])
        .collect();
    let mc = 300 * dirs.len();
    let design = sphere_uniformity(&dirs, mc, 1)?;
    let random = sphere_uniformity(&random_directions(dirs.len(), 2), mc, 1)?;
    println!("{} directions, {mc} Monte-Carlo points", dirs.len());
    for (name, s) in [("spiral path", &design), ("uniform random", &random)] {
        println!(
            "{name:15} CV {:.3} (caps excluded {:.3})  area range {:.2e}..{:.2e} sr",
            s.all.cv, s.excluding_caps.cv, s.all.min, s.all.max
        );
    }
    Ok(())
}
