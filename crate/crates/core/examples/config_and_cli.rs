//! A TOML config driven through the same entry point as the `kspace` binary.

use kspace::cli::run_subcommand;
use kspace::io::parse_config;

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

[density]
alpha = 2.25
"#;

fn main() {
    let cfg = parse_config(INAV).expect("valid config");
    println!("effective config:\n{}", cfg.to_toml());

    let dir = std::env::temp_dir().join("kspace-cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("inav.toml");
    std::fs::write(&path, INAV).unwrap();
    let status = run_subcommand(["kspace", "info", "--config", path.to_str().unwrap()]);
    println!("info exited with {status}");
    let status = run_subcommand(["kspace", "info", "--config", path.to_str().unwrap(), "--alpha", "0.5"]);
    println!("bad override exited with {status}");
}
