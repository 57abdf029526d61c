//! Write a trajectory with its DCF, read it back and check it bit for bit.

use kspace::io::{export_trajectory, import_trajectory, payload_records, DesignConfig, FovConfig, ResolutionConfig};
use kspace::paths::PathKind;
use kspace::pipeline::design;

fn main() -> kspace::Result<()> {
    let cfg = DesignConfig::new(
        PathKind::Radial,
        FovConfig { l_r: 10.0, l_z: 5.0 },
        ResolutionConfig { dx: 4.0, dz: 4.0 },
    );
    let d = design(&cfg)?;
    let dir = std::env::temp_dir().join("kspace-roundtrip");
    let files = export_trajectory(&d.trajectory, &d.dcf, &dir.join("radial"), d.scale, Some(&cfg))?;
    println!("wrote {} and {}", files.header.display(), files.payload.display());
    println!("checksum {}", files.checksum);

    let back = import_trajectory(&files.header)?;
    let same = back.records == payload_records(&d.trajectory, &d.dcf)?;
    println!(
        "read {} readouts x {} samples, identical: {same}",
        back.header.readouts, back.header.samples_per_readout
    );
    println!("header:\n{}", std::fs::read_to_string(&files.header).unwrap().lines().take(12).collect::<Vec<_>>().join("\n"));
    Ok(())
}
