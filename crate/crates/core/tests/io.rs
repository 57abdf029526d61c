use std::fs;

use kspace::analysis::psf_of_points;
use kspace::io::{
    encode_payload, export_trajectory, fnv1a64, import_trajectory, parse_config, payload_records, DesignConfig,
    FovConfig, ResolutionConfig,
};
use kspace::paths::PathKind;
use kspace::pipeline::design;
use kspace::Error;

const INAV: &str = r#"
kind = "cones"
target_readouts = 32

[fov]
l_r = 28.0
l_z = 14.0

[resolution]
dx = 4.4
dz = 4.4

[hardware]
t_read_ms = 2.8
g_max = 39.0
s_max = 145.0

[density]
alpha = 2.25
"#;

fn small_radial() -> DesignConfig {
    DesignConfig::new(
        PathKind::Radial,
        FovConfig { l_r: 6.0, l_z: 4.0 },
        ResolutionConfig { dx: 6.0, dz: 6.0 },
    )
}

#[test]
fn inav_config_parses() {
    let c = parse_config(INAV).unwrap();
    assert_eq!(c.kind, PathKind::Cones);
    assert_eq!(c.target_readouts, Some(32));
    assert_eq!(c.density.alpha, 2.25);
    assert_eq!(c.hardware.dt_us, 4.0);
    let e = c.extent_model().unwrap();
    assert!((e.k_r - 0.5 / 0.44).abs() < 1e-12);
}

#[test]
fn config_rejections_carry_field_paths() {
    let bad = INAV.replace("alpha = 2.25", "alpha = 2.25\nalpha_z = 0.5");
    match parse_config(&bad) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "density.alpha_z"),
        other => panic!("{other:?}"),
    }
    match parse_config(&INAV.replace("t_read_ms = 2.8", "t_read_ms = 0.0")) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "hardware.t_read_ms"),
        other => panic!("{other:?}"),
    }
    match parse_config(&INAV.replace("[density]", "[densty]")) {
        Err(e @ Error::Config { .. }) => assert_eq!(e.category(), "config"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn export_import_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_radial();
    let d = design(&cfg).unwrap();
    let files = export_trajectory(&d.trajectory, &d.dcf, &dir.path().join("r"), d.scale, Some(&cfg)).unwrap();
    let bytes = fs::read(&files.payload).unwrap();
    assert_eq!(bytes.len(), d.trajectory.readouts.len() * d.trajectory.samples_per_readout() * 16);
    assert_eq!(format!("{:016x}", fnv1a64(&bytes)), files.checksum);

    let back = import_trajectory(&files.header).unwrap();
    let original = payload_records(&d.trajectory, &d.dcf).unwrap();
    assert_eq!(back.records.len(), original.len());
    for (a, b) in back.records.iter().flatten().zip(original.iter().flatten()) {
        for i in 0..4 {
            assert_eq!(a[i].to_bits(), b[i].to_bits());
        }
    }
    assert_eq!(encode_payload(&back.records), bytes);
    assert_eq!(back.header.config.as_ref(), Some(&cfg));
    assert_eq!(back.header.n_real, d.path.n_real);
    assert_eq!(back.header.spec, d.trajectory.meta.spec);
}

#[test]
fn import_detects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let d = design(&small_radial()).unwrap();
    let files = export_trajectory(&d.trajectory, &d.dcf, &dir.path().join("r"), 1.0, None).unwrap();
    let mut bytes = fs::read(&files.payload).unwrap();
    bytes[17] ^= 1;
    fs::write(&files.payload, &bytes).unwrap();
    assert!(matches!(import_trajectory(&files.header), Err(Error::Format(_))));
    bytes.truncate(bytes.len() - 16);
    fs::write(&files.payload, &bytes).unwrap();
    assert!(matches!(import_trajectory(&files.header), Err(Error::Format(_))));
    fs::remove_file(&files.payload).unwrap();
    let e = import_trajectory(&files.header).unwrap_err();
    assert!(matches!(e, Error::Io { .. }));
    assert!(e.to_string().contains("r.bin"));
}

#[test]
fn same_config_gives_identical_payload() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_radial();
    cfg.kind = PathKind::Cones;
    cfg.density.alpha = 1.5;
    let a = design(&cfg).unwrap();
    let b = design(&cfg).unwrap();
    let fa = export_trajectory(&a.trajectory, &a.dcf, &dir.path().join("a"), a.scale, Some(&cfg)).unwrap();
    let fb = export_trajectory(&b.trajectory, &b.dcf, &dir.path().join("b"), b.scale, Some(&cfg)).unwrap();
    assert_eq!(fs::read(&fa.payload).unwrap(), fs::read(&fb.payload).unwrap());
    assert_eq!(fa.checksum, fb.checksum);
}

#[test]
fn reimported_design_gives_the_same_psf() {
    let dir = tempfile::tempdir().unwrap();
    let d = design(&small_radial()).unwrap();
    let files = export_trajectory(&d.trajectory, &d.dcf, &dir.path().join("r"), 1.0, None).unwrap();
    let first = import_trajectory(&files.header).unwrap();
    let again = export_trajectory(&d.trajectory, &d.dcf, &dir.path().join("s"), 1.0, None).unwrap();
    let second = import_trajectory(&again.header).unwrap();
    assert_eq!(first.header.checksum, second.header.checksum);
    let (pa, wa) = first.samples();
    let (pb, wb) = second.samples();
    let a = psf_of_points(&pa, &wa, [12, 12, 12], [9.0, 9.0, 6.0], 1e12).unwrap();
    let b = psf_of_points(&pb, &wb, [12, 12, 12], [9.0, 9.0, 6.0], 1e12).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(pa.len(), d.trajectory.sample_count());
}
