//! Sample density of variable-density stack and cones designs.

use kspace::analysis::{density_profile, ProfileAxis};
use kspace::io::{DesignConfig, FovConfig, ResolutionConfig};
use kspace::paths::PathKind;
use kspace::pipeline::design;

fn main() -> kspace::Result<()> {
    let mut stack = DesignConfig::new(
        PathKind::Stack,
        FovConfig { l_r: 16.0, l_z: 8.0 },
        ResolutionConfig { dx: 4.0, dz: 4.0 },
    );
    stack.density.alpha_z = 2.5;
    stack.hardware.t_read_ms = 4.0;
    let d = design(&stack)?;
    let h = density_profile(&d.trajectory, None, ProfileAxis::Z, 16)?;
    println!("stack alpha_z = 2.5, {} readouts; samples per k_z bin:", d.trajectory.readouts.len());
    for (z, c) in h.centers().iter().zip(&h.counts) {
        println!("  {z:+.3}  {c}");
    }
    let planes: Vec<f64> = d.discretized.angles.iter().map(|a| a.1).collect();
    let gaps: Vec<String> = planes.windows(2).map(|w| format!("{:.3}", w[1] - w[0])).collect();
    println!("plane spacing: {}", gaps.join(" "));

    let mut cones = DesignConfig::new(
        PathKind::Cones,
        FovConfig { l_r: 16.0, l_z: 16.0 },
        ResolutionConfig { dx: 4.0, dz: 4.0 },
    );
    cones.density.alpha = 2.25;
    cones.hardware.t_read_ms = 4.0;
    let d = design(&cones)?;
    let h = density_profile(&d.trajectory, None, ProfileAxis::Radius, 10)?;
    println!("cones alpha = 2.25; samples per unit shell volume:");
    for (r, s) in h.centers().iter().zip(h.shell_density()) {
        println!("  r {r:.2}  {s:.1}");
    }
    Ok(())
}
