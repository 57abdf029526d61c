//! Command-line front end. `run_subcommand` takes the full argv and returns
//! the process exit status.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{compute_psf_with_budget, density_profile, sphere_uniformity_with, Axis, ProfileAxis};
use crate::dcf::{radius_mask, relative_rms, voronoi_dcf_oracle, ORACLE_MAX_SAMPLES};
use crate::error::{Error, Result};
use crate::io::plot::{PathCurves, PlaneData, ProfileData};
use crate::io::{
    export_trajectory, import_trajectory, parse_config, write_json, DesignConfig, FovConfig, ResolutionConfig,
};
use crate::paths::PathKind;
use crate::pipeline::{design, design_path, Design, Timings};
use crate::vec3::{norm, scale, Vec3};

/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "KSPACE_OUT";

#[derive(Debug, Parser)]
#[command(name = "kspace", version, about = "Design 3D radial, cones and stack-of-spirals k-space trajectories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design a 3D radial trajectory and write it with its DCF.
    Radial(CommonArgs),
    /// Design a 3D cones trajectory.
    Cones(CommonArgs),
    /// Design a spherical stack of spirals.
    Stack(CommonArgs),
    /// Compare the analytic DCF with a Monte-Carlo Voronoi oracle.
    DcfCheck(CommonArgs),
    /// Compute the point spread function on a voxel grid.
    Psf(CommonArgs),
    /// Voronoi-area uniformity of readout end directions on the sphere.
    Uniformity(CommonArgs),
    /// Show the effective config and readout count, or inspect a trajectory file.
    Info(InfoArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct CommonArgs {
    /// TOML design config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: config, then $KSPACE_OUT, then ./out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trajectory kind, for subcommands that do not imply one.
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<PathKind>,
    /// FOV `l_r,l_z` in cm.
    #[arg(long, value_parser = parse_pair)]
    pub fov: Option<(f64, f64)>,
    /// Resolution `dx,dz` in mm.
    #[arg(long, value_parser = parse_pair)]
    pub res: Option<(f64, f64)>,
    /// Readout duration, ms.
    #[arg(long)]
    pub t_read: Option<f64>,
    #[arg(long)]
    pub target_readouts: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_r: Option<f64>,
    #[arg(long)]
    pub alpha_z: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// PSF grid `nx,ny,nz`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<[usize; 3]>,
    /// Monte-Carlo points for the oracles.
    #[arg(long)]
    pub mc_points: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct InfoArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Trajectory header to verify and summarize instead of designing.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<PathKind, String> {
    match s {
        "radial" => Ok(PathKind::Radial),
        "cones" => Ok(PathKind::Cones),
        "stack" => Ok(PathKind::Stack),
        _ => Err(format!("unknown kind `{s}` (radial, cones, stack)")),
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        [a] => Ok((*a, *a)),
        [a, b] => Ok((*a, *b)),
        _ => Err("expected one or two comma-separated numbers".into()),
    }
}

fn parse_grid(s: &str) -> std::result::Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [n] => Ok([*n; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err("expected nx,ny,nz".into()),
    }
}

/// Effective config: the file, if any, with flags applied on top.
pub fn effective_config(args: &CommonArgs, implied: Option<PathKind>) -> Result<DesignConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_config(&text)?
        }
        None => {
            let kind = implied.or(args.kind).ok_or_else(|| Error::Config {
                field: "kind".into(),
                message: "no config file; pass --kind".into(),
            })?;
            let need = |f: &str| Error::Config {
                field: f.into(),
                message: format!("no config file; pass --{f}"),
            };
            let (l_r, l_z) = args.fov.ok_or_else(|| need("fov"))?;
            let (dx, dz) = args.res.ok_or_else(|| need("res"))?;
            DesignConfig::new(kind, FovConfig { l_r, l_z }, ResolutionConfig { dx, dz })
        }
    };
    if let Some(k) = implied.or(args.kind) {
        cfg.kind = k;
    }
    if let Some((l_r, l_z)) = args.fov {
        cfg.fov = FovConfig { l_r, l_z };
    }
    if let Some((dx, dz)) = args.res {
        cfg.resolution = ResolutionConfig { dx, dz };
    }
    if let Some(t) = args.t_read {
        cfg.hardware.t_read_ms = t;
    }
    if let Some(t) = args.target_readouts {
        cfg.target_readouts = Some(t);
    }
    if let Some(a) = args.alpha {
        cfg.density.alpha = a;
    }
    if let Some(a) = args.alpha_r {
        cfg.density.alpha_r = a;
    }
    if let Some(a) = args.alpha_z {
        cfg.density.alpha_z = a;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(g) = args.grid {
        cfg.analysis.psf_grid = g;
    }
    if let Some(m) = args.mc_points {
        cfg.analysis.mc_points = Some(m);
    }
    if let Some(o) = &args.out {
        cfg.output.dir = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(cfg: &DesignConfig) -> PathBuf {
    cfg.output
        .dir
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    #[serde(flatten)]
    pub design: Timings,
    pub analysis_ms: f64,
}

/// Written next to every run's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub subcommand: String,
    pub config: DesignConfig,
    pub n_real: f64,
    pub count: u64,
    pub fov_scale: f64,
    pub samples: usize,
    pub templates: usize,
    pub timing: Timing,
    pub outputs: Vec<PathBuf>,
    pub metrics: serde_json::Value,
}

impl RunReport {
    fn new(sub: &str, d: &Design) -> Self {
        Self {
            subcommand: sub.into(),
            config: d.config.clone(),
            n_real: d.path.n_real,
            count: d.path.count(),
            fov_scale: d.scale,
            samples: d.trajectory.sample_count(),
            templates: d.trajectory.templates.len(),
            timing: Timing {
                design: d.timings,
                ..Timing::default()
            },
            outputs: Vec::new(),
            metrics: serde_json::Value::Null,
        }
    }

    fn finish(mut self, dir: &Path, started: Instant) -> Result<Self> {
        self.timing.total_ms = started.elapsed().as_secs_f64() * 1e3;
        let p = dir.join(format!("{}_{}_report.json", self.config.output_name(), self.subcommand));
        self.outputs.push(p.clone());
        write_json(&p, &self)?;
        Ok(self)
    }
}

fn stem(cfg: &DesignConfig, dir: &Path) -> PathBuf {
    dir.join(cfg.output_name())
}

fn run_design(sub: &str, cfg: &DesignConfig, started: Instant) -> Result<RunReport> {
    let dir = output_dir(cfg);
    let d = design(cfg)?;
    let mut r = RunReport::new(sub, &d);
    let files = export_trajectory(&d.trajectory, &d.dcf, &stem(cfg, &dir), d.scale, Some(cfg))?;
    let curves = dir.join(format!("{}_path.json", cfg.output_name()));
    write_json(&curves, &PathCurves::of(&d.path, 1000))?;
    r.metrics = json!({ "checksum": files.checksum });
    r.outputs.extend([files.header, files.payload, curves]);
    r.finish(&dir, started)
}

/// Samples with normalized ellipsoidal radius in `[0.2, 0.9]` enter the
/// relative RMS.
pub const DCF_CHECK_RADII: (f64, f64) = (0.2, 0.9);

fn run_dcf_check(cfg: &DesignConfig, started: Instant) -> Result<RunReport> {
    let dir = output_dir(cfg);
    let d = design(cfg)?;
    let n = d.trajectory.sample_count();
    if n > ORACLE_MAX_SAMPLES {
        return Err(Error::Budget {
            what: "Voronoi oracle samples".into(),
            requested: n as f64,
            limit: ORACLE_MAX_SAMPLES as f64,
            hint: "use a coarser resolution, a smaller FOV or a longer raster (dt_us)".into(),
        });
    }
    let t = Instant::now();
    let mc = cfg.analysis.mc_points.unwrap_or(cfg.analysis.mc_points_per_sample * n);
    let oracle = voronoi_dcf_oracle(&d.trajectory, mc, cfg.seed)?;
    let mask = radius_mask(&d.trajectory, DCF_CHECK_RADII.0, DCF_CHECK_RADII.1);
    let rms = relative_rms(&d.dcf.flat(), &oracle.flat(), &mask);
    let hist = density_profile(&d.trajectory, Some(&d.dcf), ProfileAxis::Radius, 32)?;
    let mut r = RunReport::new("dcf-check", &d);
    r.timing.analysis_ms = t.elapsed().as_secs_f64() * 1e3;
    let hp = dir.join(format!("{}_radius_histogram.json", cfg.output_name()));
    write_json(&hp, &hist)?;
    r.outputs.push(hp);
    r.metrics = json!({
        "mc_points": mc,
        "relative_rms": rms,
        "masked_samples": mask.iter().filter(|m| **m).count(),
        "radius_window": DCF_CHECK_RADII,
    });
    r.finish(&dir, started)
}

fn run_psf(cfg: &DesignConfig, started: Instant) -> Result<RunReport> {
    let dir = output_dir(cfg);
    let d = design(cfg)?;
    let t = Instant::now();
    let psf = compute_psf_with_budget(
        &d.trajectory,
        &d.dcf,
        cfg.analysis.psf_grid,
        cfg.psf_extent(),
        cfg.analysis.psf_budget,
    )?;
    let mut r = RunReport::new("psf", &d);
    r.timing.analysis_ms = t.elapsed().as_secs_f64() * 1e3;
    let name = cfg.output_name();
    let mut fwhm = serde_json::Map::new();
    let mut onset = serde_json::Map::new();
    for a in [Axis::X, Axis::Y, Axis::Z] {
        let key = format!("{a:?}").to_lowercase();
        let w = psf.fwhm(a);
        fwhm.insert(key.clone(), json!(w));
        onset.insert(key.clone(), json!(w.and_then(|w| psf.aliasing_onset(a, 20.0, 2.0 * w))));
        let pp = dir.join(format!("{name}_psf_plane_{key}.json"));
        write_json(&pp, &PlaneData::of(&psf, a))?;
        let pr = dir.join(format!("{name}_psf_profile_{key}.json"));
        write_json(&pr, &ProfileData::of(&psf, a))?;
        r.outputs.extend([pp, pr]);
    }
    r.metrics = json!({
        "grid": psf.shape,
        "voxel_cm": psf.voxel,
        "dc": psf.dc,
        "fwhm_cm": fwhm,
        "aliasing_onset_cm": onset,
        "max_off_center": psf.max_off_center(),
        "max_imaginary": psf.max_imaginary(),
    });
    r.finish(&dir, started)
}

/// Unit direction of every readout's final sample.
pub fn end_directions(d: &Design) -> Vec<Vec3> {
    d.trajectory
        .readouts
        .iter()
        .filter_map(|r| r.k_samples.last().copied())
        .filter(|&k| norm(k) > 0.0)
        .map(|k| scale(k, 1.0 / norm(k)))
        .collect()
}

pub fn random_directions(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..=1.0);
            let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).max(0.0).sqrt();
            [s * a.cos(), s * a.sin(), z]
        })
        .collect()
}

fn run_uniformity(cfg: &DesignConfig, started: Instant) -> Result<RunReport> {
    let dir = output_dir(cfg);
    let d = design(cfg)?;
    let t = Instant::now();
    let dirs = end_directions(&d);
    let mc = cfg.analysis.mc_points.unwrap_or(cfg.analysis.mc_points_per_sample * dirs.len());
    let design_stats = sphere_uniformity_with(&dirs, mc, cfg.seed, cfg.analysis.cap_deg)?;
    let random = random_directions(dirs.len(), cfg.seed ^ 0x5eed);
    let random_stats = sphere_uniformity_with(&random, mc, cfg.seed, cfg.analysis.cap_deg)?;
    let mut r = RunReport::new("uniformity", &d);
    r.timing.analysis_ms = t.elapsed().as_secs_f64() * 1e3;
    let ap = dir.join(format!("{}_sphere_areas.json", cfg.output_name()));
    write_json(&ap, &json!({ "directions": dirs, "areas": design_stats.areas }))?;
    r.outputs.push(ap);
    r.metrics = json!({
        "mc_points": mc,
        "cap_deg": cfg.analysis.cap_deg,
        "design": { "all": design_stats.all, "excluding_caps": design_stats.excluding_caps },
        "random": { "all": random_stats.all, "excluding_caps": random_stats.excluding_caps },
    });
    r.finish(&dir, started)
}

fn run_info(args: &InfoArgs) -> Result<serde_json::Value> {
    if let Some(h) = &args.trajectory {
        let t = import_trajectory(h)?;
        let (pts, w) = t.samples();
        let k_max = pts.iter().map(|&p| norm(p)).fold(0.0, f64::max);
        return Ok(json!({
            "header": h,
            "kind": t.header.kind,
            "readouts": t.header.readouts,
            "samples_per_readout": t.header.samples_per_readout,
            "samples": pts.len(),
            "n_real": t.header.n_real,
            "checksum": t.header.checksum,
            "checksum_ok": true,
            "k_max": k_max,
            "weight_sum": w.iter().sum::<f64>(),
        }));
    }
    let cfg = effective_config(&args.common, None)?;
    let t = Instant::now();
    let (scale, path) = design_path(&cfg)?;
    Ok(json!({
        "config": cfg,
        "n_real": path.n_real,
        "count": path.count(),
        "fov_scale": scale,
        "path_ms": t.elapsed().as_secs_f64() * 1e3,
    }))
}

/// Runs a parsed command and returns its JSON report.
pub fn execute(cli: &Cli) -> Result<serde_json::Value> {
    let started = Instant::now();
    let report = match &cli.command {
        Command::Radial(a) => run_design("radial", &effective_config(a, Some(PathKind::Radial))?, started)?,
        Command::Cones(a) => run_design("cones", &effective_config(a, Some(PathKind::Cones))?, started)?,
        Command::Stack(a) => run_design("stack", &effective_config(a, Some(PathKind::Stack))?, started)?,
        Command::DcfCheck(a) => run_dcf_check(&effective_config(a, None)?, started)?,
        Command::Psf(a) => run_psf(&effective_config(a, None)?, started)?,
        Command::Uniformity(a) => run_uniformity(&effective_config(a, None)?, started)?,
        Command::Info(a) => return run_info(a),
    };
    serde_json::to_value(&report).map_err(|e| Error::Format(e.to_string()))
}

/// Parses `argv` (program name first), runs it and returns the exit status.
/// Reports go to stdout as JSON; failures go to stderr as a JSON object
/// carrying the error category.
pub fn run_subcommand<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(v) => {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap_or_default());
            0
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": { "category": e.category(), "message": e.to_string() } }));
            e.exit_code()
        }
    }
}
