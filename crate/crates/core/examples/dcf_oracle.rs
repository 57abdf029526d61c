//! Analytic Jacobian DCF against a Monte-Carlo Voronoi oracle.

use std::time::Instant;

use kspace::dcf::{radius_mask, relative_rms, voronoi_dcf_oracle};
use kspace::io::{DesignConfig, FovConfig, ResolutionConfig};
use kspace::paths::PathKind;
use kspace::pipeline::design;

fn main() -> kspace::Result<()> {
    let mut cfg = DesignConfig::new(
        PathKind::Radial,
        FovConfig { l_r: 10.0, l_z: 10.0 },
        ResolutionConfig { dx: 4.0, dz: 4.0 },
    );
    cfg.hardware.t_read_ms = 5.0;
    cfg.hardware.dt_us = 20.0;
    let d = design(&cfg)?;
    let n = d.trajectory.sample_count();
    println!("{} spokes, {n} samples", d.trajectory.readouts.len());

    let t = Instant::now();
    let oracle = voronoi_dcf_oracle(&d.trajectory, 200 * n, 7)?;
    let mask = radius_mask(&d.trajectory, 0.2, 0.9);
    let rms = relative_rms(&d.dcf.flat(), &oracle.flat(), &mask);
    println!("relative RMS over 0.2K..0.9K: {:.2}% ({:.1} s)", 100.0 * rms, t.elapsed().as_secs_f64());

    let r = &d.trajectory.readouts[d.trajectory.readouts.len() / 2];
    let base = d.trajectory.readouts[..r.index].iter().map(|r| r.k_samples.len()).sum::<usize>();
    let (a, o) = (&d.dcf.weights[r.index], &oracle.flat()[base..base + r.k_samples.len()]);
    println!("  |k|      analytic    oracle");
    for i in (0..a.len()).step_by(a.len() / 8) {
        let k = r.k_samples[i];
        let kr = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        println!("  {kr:.3}   {:.3e}   {:.3e}", a[i], o[i]);
    }
    Ok(())
}
