//! Readout counts of 3D radial designs, isotropic and anisotropic.

use std::f64::consts::PI;

use kspace::geometry::{ExtentModel, FovModel};
use kspace::paths::design_radial_path;

fn main() -> kspace::Result<()> {
    let iso = design_radial_path(&FovModel::isotropic(10.0)?, &ExtentModel::isotropic(1.25)?)?;
    println!("isotropic L=10 cm, K=1.25 cm^-1");
    println!("  n_real   {:.2}  (4 pi K^2 L^2 = {:.2})", iso.n_real, 4.0 * PI * 1.25f64.powi(2) * 100.0);
    println!("  readouts {}", iso.count());
    let worst = (1..100)
        .map(|i| i as f64 / 100.0)
        .map(|u| (iso.second_coord(u) - (1.0 - 2.0 * u).acos()).abs())
        .fold(0.0, f64::max);
    println!("  max |phi_p(u) - acos(1 - 2u)| = {worst:.2e} rad");

    let e = ExtentModel::from_resolution(0.12, 0.12)?;
    for (l_r, l_z) in [(28.0, 28.0), (28.0, 14.0), (28.0, 7.0)] {
        let p = design_radial_path(&FovModel::new(l_r, l_z)?, &e)?;
        println!("1.2 mm, FOV ({l_r}, {l_r}, {l_z}) cm: n_real {:.2}", p.n_real);
    }
    Ok(())
}
