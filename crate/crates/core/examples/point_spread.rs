//! PSF of an anisotropic radial design: main lobe and where aliasing sets in.

use std::time::Instant;

use kspace::analysis::{compute_psf, Axis};
use kspace::io::{DesignConfig, FovConfig, ResolutionConfig};
use kspace::paths::PathKind;
use kspace::pipeline::design;

fn main() -> kspace::Result<()> {
    let mut cfg = DesignConfig::new(
        PathKind::Radial,
        FovConfig { l_r: 8.0, l_z: 4.0 },
        ResolutionConfig { dx: 8.0, dz: 8.0 },
    );
    cfg.hardware.t_read_ms = 5.0;
    cfg.hardware.dt_us = 10.0;
    let d = design(&cfg)?;
    println!("{} spokes, {} samples", d.trajectory.readouts.len(), d.trajectory.sample_count());

    let t = Instant::now();
    let psf = compute_psf(&d.trajectory, &d.dcf, [96; 3], [12.0; 3])?;
    println!("96^3 voxels over 12 cm in {:.1} s", t.elapsed().as_secs_f64());
    for a in [Axis::X, Axis::Z] {
        let w = psf.fwhm(a).unwrap_or(f64::NAN);
        let onset = psf.aliasing_onset(a, 20.0, 2.0 * w);
        println!("{a:?}: FWHM {w:.3} cm, aliasing onset {onset:?} cm");
    }
    println!("largest imaginary part {:.1e}", psf.max_imaginary());
    let prof = psf.profile(Axis::Z);
    for i in (48..96).step_by(4) {
        println!("  z {:5.2} cm  |psf| {:.4}", psf.coord(Axis::Z, i), prof[i]);
    }
    Ok(())
}
