//! Command-line surface: `phantom | prefilter | preint-table | render |
//! compare | bench`.
//!
//! Every subcommand accepts `--config FILE` with plain-text `key=value`
//! lines (same keys as the long flags); explicit flags win over config
//! values. Each run prints its resolved settings and their digest, and
//! every output file gets a `<file>.settings` sidecar with the same
//! information.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 I/O error,
//! 3 numerical or validation failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use volren_core::camera::{Camera, Projection};
use volren_core::interp::InterpolationMode;
use volren_core::math::Vec3;
use volren_core::mipmap::build_mip_pyramid;
use volren_core::phantom::{make_phantom, Axis, PhantomKind, PhantomSpec};
use volren_core::quality;
use volren_core::raycast::{
    AdaptiveSettings, BoundaryMode, ClipPlane, Framebuffer, JitterMode, RenderSettings, Scene,
    SegmentMode,
};
use volren_core::volume::{Dtype, ScalarVolume};

use crate::bench::{bench_csv, bench_prefilter, bench_resolution_sweep, bench_samples_sweep, BenchConfig, BenchVariant};
use crate::digest::SettingsDigest;
use crate::error::{Error, Result};
use crate::io::{image, preint, raw, tf as tfio, KeyValueFile};
use crate::parallel;

#[derive(Parser, Debug)]
#[command(name = "volren", version, about = "CPU volume renderer and artifact measurement toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic test volume.
    Phantom(PhantomArgs),
    /// Precompute tricubic B-spline coefficients for a volume.
    Prefilter(PrefilterArgs),
    /// Build a pre-integration table from a transfer function.
    #[command(name = "preint-table")]
    PreintTable(PreintArgs),
    /// Render a volume to a PFM or PPM image.
    Render(RenderArgs),
    /// Compare two images and report quality metrics.
    Compare(CompareArgs),
    /// Run the performance harness.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Default)]
struct PhantomArgs {
    /// sphere_shell | tube | slab | constant | linear_ramp
    #[arg(long)]
    kind: Option<String>,
    /// Voxel counts: "128" (cube) or "128x96x64"
    #[arg(long)]
    dims: Option<String>,
    /// World units per voxel: "sx,sy,sz"
    #[arg(long)]
    spacing: Option<String>,
    /// Sphere center in voxel units: "x,y,z" (default: volume center)
    #[arg(long)]
    center: Option<String>,
    #[arg(long)]
    inner_radius: Option<f64>,
    #[arg(long)]
    outer_radius: Option<f64>,
    #[arg(long)]
    interior_value: Option<f64>,
    #[arg(long)]
    shell_value: Option<f64>,
    /// Tube/slab/ramp axis: x | y | z
    #[arg(long)]
    axis: Option<String>,
    /// Tube center in the perpendicular plane: "a,b"
    #[arg(long)]
    tube_center: Option<String>,
    /// Tube radius in voxels
    #[arg(long)]
    radius: Option<f64>,
    /// Scalar value of constant/tube/slab material
    #[arg(long)]
    value: Option<f64>,
    #[arg(long)]
    slab_min: Option<f64>,
    #[arg(long)]
    slab_max: Option<f64>,
    #[arg(long)]
    ramp_start: Option<f64>,
    #[arg(long)]
    ramp_end: Option<f64>,
    /// Smoothstep edge width in voxels (0 = hard edge)
    #[arg(long)]
    sigma_edge: Option<f64>,
    /// Output sample type: u8 | u16le | f32le
    #[arg(long)]
    dtype: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct PrefilterArgs {
    #[arg(long)]
    volume: Option<PathBuf>,
    /// Explicit metadata sidecar (default: volume path with .meta)
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct PreintArgs {
    /// Transfer function CSV
    #[arg(long)]
    tf: Option<PathBuf>,
    /// Segment length the transfer function opacities are calibrated for
    #[arg(long)]
    d_ref: Option<f64>,
    /// Segment length the table is built for (voxel units)
    #[arg(long)]
    d_base: Option<f64>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Midpoint-rule steps per entry
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct RenderArgs {
    #[arg(long)]
    volume: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Coefficient volume for tricubic interpolation
    #[arg(long)]
    coeffs: Option<PathBuf>,
    #[arg(long)]
    tf: Option<PathBuf>,
    #[arg(long)]
    d_ref: Option<f64>,
    /// Pre-integration table for --mode preint
    #[arg(long)]
    preint: Option<PathBuf>,
    /// "pos=x,y,z;target=x,y,z;up=x,y,z;ortho=HEIGHT" or "...;fov=DEGREES"
    #[arg(long)]
    camera: Option<String>,
    /// Viewport "WxH"
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    spv: Option<f64>,
    /// single | preint
    #[arg(long)]
    mode: Option<String>,
    /// nearest | trilinear | tricubic
    #[arg(long)]
    interp: Option<String>,
    /// on | off
    #[arg(long)]
    jitter: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// truncate | partial
    #[arg(long)]
    boundary: Option<String>,
    /// Early ray termination epsilon
    #[arg(long)]
    ert: Option<f64>,
    /// Adaptive marching: "THETA,MAX_DEPTH"
    #[arg(long)]
    adaptive: Option<String>,
    /// Clip plane "nx,ny,nz,d" keeping the half-space n.x + d >= 0
    #[arg(long)]
    clip: Option<String>,
    /// Mipmap level (0 = full resolution)
    #[arg(long)]
    mip: Option<usize>,
    /// on | off (off shows the translucency drift of uncorrected opacity)
    #[arg(long)]
    opacity_correction: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output image: .pfm (float) or .ppm (8-bit)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Reference image (.pfm or .ppm)
    a: PathBuf,
    /// Test image (.pfm or .ppm)
    b: PathBuf,
    /// Exit with code 3 when PSNR falls below this many dB
    #[arg(long)]
    min_psnr: Option<f64>,
    /// Measure banding energy around "x,y" (pixel coordinates, both images)
    #[arg(long)]
    banding_center: Option<String>,
    /// Measure angular anisotropy on the circle "x,y,radius" (both images)
    #[arg(long)]
    anisotropy: Option<String>,
    /// Append a CSV row of the metrics to this file
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Scene label for the CSV row
    #[arg(long)]
    scene_id: Option<String>,
}

#[derive(Args, Debug, Default)]
struct BenchArgs {
    /// samples | resolution | prefilter
    #[arg(long)]
    scenario: Option<String>,
    /// Edge length of the generated benchmark volume
    #[arg(long)]
    dims: Option<usize>,
    /// Viewport for the samples sweep, "WxH"
    #[arg(long)]
    size: Option<String>,
    /// Comma-separated samples-per-voxel list
    #[arg(long)]
    spv_list: Option<String>,
    /// Comma-separated mode list: simple,preint,tricubic,preint-tricubic
    #[arg(long)]
    modes: Option<String>,
    /// Comma-separated resolutions "512x512,800x600,..."
    #[arg(long)]
    resolutions: Option<String>,
    /// Comma-separated cube sizes for the prefilter scenario
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Phantom(args) => cmd_phantom(args),
        Command::Prefilter(args) => cmd_prefilter(args),
        Command::PreintTable(args) => cmd_preint(args),
        Command::Render(args) => cmd_render(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => 2,
        Error::Core(core) => match core {
            volren_core::Error::Dimension(_) => 3,
            _ => 1,
        },
        Error::Format { .. } => 3,
        Error::Validation(_) => 3,
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Core(volren_core::Error::Parameter(msg.into()))
}

// --- config merging ------------------------------------------------------

fn load_config(path: &Option<PathBuf>) -> Result<KeyValueFile> {
    match path {
        Some(p) => KeyValueFile::load(p),
        None => Ok(KeyValueFile::default()),
    }
}

fn merge_string(slot: &mut Option<String>, cfg: &KeyValueFile, key: &str) {
    if slot.is_none() {
        if let Some(v) = cfg.get(key) {
            *slot = Some(v.to_string());
        }
    }
}

fn merge_path(slot: &mut Option<PathBuf>, cfg: &KeyValueFile, key: &str) {
    if slot.is_none() {
        if let Some(v) = cfg.get(key) {
            *slot = Some(PathBuf::from(v));
        }
    }
}

fn merge_parse<T: std::str::FromStr>(slot: &mut Option<T>, cfg: &KeyValueFile, key: &str) -> Result<()> {
    if slot.is_none() {
        if let Some(v) = cfg.get(key) {
            *slot = Some(
                v.parse::<T>()
                    .map_err(|_| usage(format!("config key '{key}': cannot parse '{v}'")))?,
            );
        }
    }
    Ok(())
}

// --- small parsers -------------------------------------------------------

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .map(|p| p.parse::<f64>().map_err(|_| usage(format!("bad number '{p}' in {what}"))))
        .collect()
}

fn parse_vec3(text: &str, what: &str) -> Result<Vec3> {
    let v = parse_f64_list(text, what)?;
    if v.len() != 3 {
        return Err(usage(format!("{what} needs 3 comma-separated values, got '{text}'")));
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn parse_dims(text: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = text.split('x').collect();
    let parse = |p: &str| -> Result<usize> {
        p.trim().parse().map_err(|_| usage(format!("bad dimension '{p}'")))
    };
    match parts.len() {
        1 => {
            let n = parse(parts[0])?;
            Ok((n, n, n))
        }
        3 => Ok((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)),
        _ => Err(usage(format!("dims must be 'N' or 'NXxNYxNZ', got '{text}'"))),
    }
}

fn parse_size(text: &str) -> Result<(usize, usize)> {
    let (w, h) = text
        .split_once('x')
        .ok_or_else(|| usage(format!("size must be 'WxH', got '{text}'")))?;
    Ok((
        w.trim().parse().map_err(|_| usage(format!("bad width '{w}'")))?,
        h.trim().parse().map_err(|_| usage(format!("bad height '{h}'")))?,
    ))
}

fn parse_on_off(text: &str, what: &str) -> Result<bool> {
    match text {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(usage(format!("{what} must be 'on' or 'off', got '{other}'"))),
    }
}

/// Camera spec: "pos=x,y,z;target=x,y,z;up=x,y,z;ortho=H" or "...;fov=D".
fn parse_camera(text: &str, width: usize, height: usize) -> Result<Camera> {
    let mut pos = None;
    let mut target = None;
    let mut up = Vec3::new(0.0, 1.0, 0.0);
    let mut projection = None;
    for field in text.split(';') {
        let field = field.trim();
        if field.is_empty() {
            continue;
        }
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| usage(format!("camera field '{field}' is not key=value")))?;
        match key.trim() {
            "pos" => pos = Some(parse_vec3(value, "camera pos")?),
            "target" => target = Some(parse_vec3(value, "camera target")?),
            "up" => up = parse_vec3(value, "camera up")?,
            "ortho" => {
                let h: f64 = value.trim().parse().map_err(|_| usage("bad ortho height"))?;
                projection = Some(Projection::Orthographic { height: h });
            }
            "fov" => {
                let d: f64 = value.trim().parse().map_err(|_| usage("bad fov"))?;
                projection = Some(Projection::Perspective { fov_y_deg: d });
            }
            other => return Err(usage(format!("unknown camera field '{other}'"))),
        }
    }
    let pos = pos.ok_or_else(|| usage("camera needs pos=x,y,z"))?;
    let target = target.ok_or_else(|| usage("camera needs target=x,y,z"))?;
    let projection = projection.ok_or_else(|| usage("camera needs ortho=H or fov=D"))?;
    Ok(Camera::new(pos, target, up, projection, width, height)?)
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("missing required --{flag} (flag or config)")))
}

fn write_settings_sidecar(out: &Path, digest: &SettingsDigest) -> Result<()> {
    let mut sidecar = out.as_os_str().to_owned();
    sidecar.push(".settings");
    let path = PathBuf::from(sidecar);
    std::fs::write(&path, digest.sidecar_text()).map_err(|e| Error::io(&path, e))
}

fn announce(digest: &SettingsDigest) {
    println!("settings: {}", digest.canonical());
    println!("digest: {}", digest.hash_hex());
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            if n == 0 {
                return Err(usage("--threads must be >= 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

// --- phantom -------------------------------------------------------------

fn cmd_phantom(mut args: PhantomArgs) -> Result<i32> {
    let cfg = load_config(&args.config)?;
    merge_string(&mut args.kind, &cfg, "kind");
    merge_string(&mut args.dims, &cfg, "dims");
    merge_string(&mut args.spacing, &cfg, "spacing");
    merge_string(&mut args.center, &cfg, "center");
    merge_string(&mut args.tube_center, &cfg, "tube_center");
    merge_string(&mut args.axis, &cfg, "axis");
    merge_string(&mut args.dtype, &cfg, "dtype");
    merge_path(&mut args.out, &cfg, "out");
    merge_parse(&mut args.inner_radius, &cfg, "inner_radius")?;
    merge_parse(&mut args.outer_radius, &cfg, "outer_radius")?;
    merge_parse(&mut args.interior_value, &cfg, "interior_value")?;
    merge_parse(&mut args.shell_value, &cfg, "shell_value")?;
    merge_parse(&mut args.radius, &cfg, "radius")?;
    merge_parse(&mut args.value, &cfg, "value")?;
    merge_parse(&mut args.slab_min, &cfg, "slab_min")?;
    merge_parse(&mut args.slab_max, &cfg, "slab_max")?;
    merge_parse(&mut args.ramp_start, &cfg, "ramp_start")?;
    merge_parse(&mut args.ramp_end, &cfg, "ramp_end")?;
    merge_parse(&mut args.sigma_edge, &cfg, "sigma_edge")?;

    let kind_name = require(args.kind, "kind")?;
    let dims = parse_dims(&require(args.dims, "dims")?)?;
    let spacing = match &args.spacing {
        Some(s) => {
            let v = parse_vec3(s, "spacing")?;
            (v.x, v.y, v.z)
        }
        None => (1.0, 1.0, 1.0),
    };
    let out = require(args.out, "out")?;
    let dtype = Dtype::parse(args.dtype.as_deref().unwrap_or("f32le"))?;
    let sigma = args.sigma_edge.unwrap_or(0.0);
    let grid_center = Vec3::new(
        (dims.0 - 1) as f64 / 2.0,
        (dims.1 - 1) as f64 / 2.0,
        (dims.2 - 1) as f64 / 2.0,
    );
    let axis = Axis::parse(args.axis.as_deref().unwrap_or("z"))?;

    let kind = match kind_name.as_str() {
        "constant" => PhantomKind::Constant { value: args.value.unwrap_or(0.8) },
        "sphere_shell" => {
            let center = match &args.center {
                Some(c) => parse_vec3(c, "center")?,
                None => grid_center,
            };
            let outer_default = dims.0.min(dims.1).min(dims.2) as f64 / 3.0;
            PhantomKind::SphereShell {
                center: [center.x, center.y, center.z],
                inner_radius: args.inner_radius.unwrap_or(0.0),
                outer_radius: args.outer_radius.unwrap_or(outer_default),
                interior_value: args.interior_value.unwrap_or(0.9),
                shell_value: args.shell_value.unwrap_or(0.9),
            }
        }
        "tube" => {
            let center = match &args.tube_center {
                Some(c) => {
                    let v = parse_f64_list(c, "tube_center")?;
                    if v.len() != 2 {
                        return Err(usage("tube_center needs 2 values"));
                    }
                    [v[0], v[1]]
                }
                None => match axis {
                    Axis::X => [grid_center.y, grid_center.z],
                    Axis::Y => [grid_center.x, grid_center.z],
                    Axis::Z => [grid_center.x, grid_center.y],
                },
            };
            PhantomKind::Tube {
                axis,
                center,
                radius: args.radius.unwrap_or(0.5),
                value: args.value.unwrap_or(1.0),
            }
        }
        "slab" => {
            let n = match axis {
                Axis::X => dims.0,
                Axis::Y => dims.1,
                Axis::Z => dims.2,
            } as f64;
            PhantomKind::Slab {
                axis,
                min: args.slab_min.unwrap_or(n / 4.0),
                max: args.slab_max.unwrap_or(3.0 * n / 4.0),
                value: args.value.unwrap_or(0.8),
            }
        }
        "linear_ramp" => PhantomKind::LinearRamp {
            axis,
            start_value: args.ramp_start.unwrap_or(0.0),
            end_value: args.ramp_end.unwrap_or(1.0),
        },
        other => return Err(usage(format!("unknown phantom kind '{other}'"))),
    };
    let spec = PhantomSpec { kind: kind.clone(), edge_width: sigma };
    let vol = make_phantom(&spec, dims, spacing)?;

    let mut digest = SettingsDigest::new("phantom");
    digest.push("kind", &kind_name);
    digest.push("geometry", format!("{kind:?}"));
    digest.push("sigma_edge", sigma);
    digest.push("dims", format!("{}x{}x{}", dims.0, dims.1, dims.2));
    digest.push("spacing", format!("{},{},{}", spacing.0, spacing.1, spacing.2));
    digest.push("dtype", dtype.name());
    digest.push("out", out.display());
    announce(&digest);

    raw::save_raw_volume(&vol, &out, dtype)?;
    write_settings_sidecar(&out, &digest)?;
    println!("wrote {} ({} voxels)", out.display(), vol.voxel_count());
    Ok(0)
}

// --- prefilter -----------------------------------------------------------

fn load_volume(volume: &Path, meta_override: &Option<PathBuf>) -> Result<ScalarVolume> {
    match meta_override {
        None => raw::load_raw_volume_auto(volume),
        Some(meta_file) => {
            let (meta, _) = raw::read_meta_file(meta_file)?;
            raw::load_raw_volume(volume, &meta)
        }
    }
}

fn cmd_prefilter(mut args: PrefilterArgs) -> Result<i32> {
    let cfg = load_config(&args.config)?;
    merge_path(&mut args.volume, &cfg, "volume");
    merge_path(&mut args.meta, &cfg, "meta");
    merge_path(&mut args.out, &cfg, "out");
    merge_parse(&mut args.threads, &cfg, "threads")?;

    let volume = require(args.volume, "volume")?;
    let out = require(args.out, "out")?;
    let vol = load_volume(&volume, &args.meta)?;

    let mut digest = SettingsDigest::new("prefilter");
    digest.push("volume", volume.display());
    digest.push("dims", format!("{:?}", vol.dims()));
    digest.push_opt("threads", args.threads);
    digest.push("out", out.display());
    announce(&digest);

    let coeffs = with_threads(args.threads, || parallel::prefilter_bspline_coefficients(&vol))??;
    raw::save_coefficients(&coeffs, &out)?;
    write_settings_sidecar(&out, &digest)?;
    println!("wrote {}", out.display());
    Ok(0)
}

// --- preint-table --------------------------------------------------------

fn cmd_preint(mut args: PreintArgs) -> Result<i32> {
    let cfg = load_config(&args.config)?;
    merge_path(&mut args.tf, &cfg, "tf");
    merge_path(&mut args.out, &cfg, "out");
    merge_parse(&mut args.d_ref, &cfg, "d_ref")?;
    merge_parse(&mut args.d_base, &cfg, "d_base")?;
    merge_parse(&mut args.resolution, &cfg, "resolution")?;
    merge_parse(&mut args.steps, &cfg, "steps")?;
    merge_parse(&mut args.threads, &cfg, "threads")?;

    let tf_path = require(args.tf, "tf")?;
    let out = require(args.out, "out")?;
    let d_ref = args.d_ref.unwrap_or(1.0);
    let d_base = args.d_base.unwrap_or(1.0);
    let resolution = args.resolution.unwrap_or(256);
    let steps = args.steps.unwrap_or(64);
    let tf = tfio::load_transfer_csv(&tf_path, d_ref)?;

    let mut digest = SettingsDigest::new("preint-table");
    digest.push("tf", tf_path.display());
    digest.push("d_ref", d_ref);
    digest.push("d_base", d_base);
    digest.push("resolution", resolution);
    digest.push("steps", steps);
    digest.push("out", out.display());
    announce(&digest);

    let table = with_threads(args.threads, || {
        parallel::build_preintegration_table(&tf, d_base, resolution, steps)
    })??;
    preint::save_preintegration_table(&table, &out)?;
    write_settings_sidecar(&out, &digest)?;
    println!("wrote {}", out.display());
    Ok(0)
}

// --- render --------------------------------------------------------------

fn cmd_render(mut args: RenderArgs) -> Result<i32> {
    let cfg = load_config(&args.config)?;
    merge_path(&mut args.volume, &cfg, "volume");
    merge_path(&mut args.meta, &cfg, "meta");
    merge_path(&mut args.coeffs, &cfg, "coeffs");
    merge_path(&mut args.tf, &cfg, "tf");
    merge_path(&mut args.preint, &cfg, "preint");
    merge_path(&mut args.out, &cfg, "out");
    merge_string(&mut args.camera, &cfg, "camera");
    merge_string(&mut args.size, &cfg, "size");
    merge_string(&mut args.mode, &cfg, "mode");
    merge_string(&mut args.interp, &cfg, "interp");
    merge_string(&mut args.jitter, &cfg, "jitter");
    merge_string(&mut args.boundary, &cfg, "boundary");
    merge_string(&mut args.adaptive, &cfg, "adaptive");
    merge_string(&mut args.clip, &cfg, "clip");
    merge_string(&mut args.opacity_correction, &cfg, "opacity_correction");
    merge_parse(&mut args.d_ref, &cfg, "d_ref")?;
    merge_parse(&mut args.spv, &cfg, "spv")?;
    merge_parse(&mut args.seed, &cfg, "seed")?;
    merge_parse(&mut args.ert, &cfg, "ert")?;
    merge_parse(&mut args.mip, &cfg, "mip")?;
    merge_parse(&mut args.threads, &cfg, "threads")?;

    let volume_path = require(args.volume, "volume")?;
    let tf_path = require(args.tf, "tf")?;
    let camera_text = require(args.camera, "camera")?;
    let size_text = require(args.size, "size")?;
    let out = require(args.out, "out")?;

    let interpolation = InterpolationMode::parse(args.interp.as_deref().unwrap_or("trilinear"))?;
    let segment_mode = match args.mode.as_deref().unwrap_or("single") {
        "single" => SegmentMode::SingleSample,
        "preint" => SegmentMode::Preintegrated,
        other => return Err(usage(format!("mode must be 'single' or 'preint', got '{other}'"))),
    };
    if interpolation == InterpolationMode::TricubicBspline && args.coeffs.is_none() {
        return Err(usage("--interp tricubic requires --coeffs"));
    }
    if segment_mode == SegmentMode::Preintegrated && args.preint.is_none() {
        return Err(usage("--mode preint requires --preint"));
    }
    let jitter_on = parse_on_off(args.jitter.as_deref().unwrap_or("off"), "jitter")?;
    let seed = args.seed.unwrap_or(0);
    let boundary = match args.boundary.as_deref().unwrap_or("partial") {
        "truncate" => BoundaryMode::Truncate,
        "partial" => BoundaryMode::PartialSegment,
        other => return Err(usage(format!("boundary must be 'truncate' or 'partial', got '{other}'"))),
    };
    let adaptive = match &args.adaptive {
        None => None,
        Some(text) => {
            let v = parse_f64_list(text, "adaptive")?;
            if v.len() != 2 {
                return Err(usage("adaptive needs 'THETA,MAX_DEPTH'"));
            }
            Some(AdaptiveSettings { threshold: v[0], max_depth: v[1] as u32 })
        }
    };
    let clip_plane = match &args.clip {
        None => None,
        Some(text) => {
            let v = parse_f64_list(text, "clip")?;
            if v.len() != 4 {
                return Err(usage("clip needs 'nx,ny,nz,d'"));
            }
            Some(ClipPlane { normal: Vec3::new(v[0], v[1], v[2]), offset: v[3] })
        }
    };
    let correction = parse_on_off(args.opacity_correction.as_deref().unwrap_or("on"), "opacity_correction")?;
    let (width, height) = parse_size(&size_text)?;
    let camera = parse_camera(&camera_text, width, height)?;
    let mip_level = args.mip.unwrap_or(0);

    let settings = RenderSettings {
        samples_per_voxel: args.spv.unwrap_or(1.0),
        segment_mode,
        interpolation,
        jitter: if jitter_on { JitterMode::Hashed { seed } } else { JitterMode::None },
        boundary_mode: boundary,
        early_termination_epsilon: args.ert,
        adaptive,
        clip_plane,
        mip_level,
        opacity_correction: correction,
    };

    let vol = load_volume(&volume_path, &args.meta)?;
    let coeffs = args.coeffs.as_ref().map(|p| raw::load_coefficients(p)).transpose()?;
    let tf = tfio::load_transfer_csv(&tf_path, args.d_ref.unwrap_or(1.0))?;
    let table = args.preint.as_ref().map(|p| preint::load_preintegration_table(p)).transpose()?;
    let pyramid = if mip_level > 0 { Some(build_mip_pyramid(&vol, mip_level + 1)?) } else { None };

    let scene = Scene {
        volume: &vol,
        pyramid: pyramid.as_ref(),
        coefficients: coeffs.as_ref(),
        transfer: &tf,
        preintegration: table.as_ref(),
    };

    let mut digest = SettingsDigest::new("render");
    digest.push("volume", volume_path.display());
    digest.push_opt("coeffs", args.coeffs.as_ref().map(|p| p.display().to_string()));
    digest.push("tf", tf_path.display());
    digest.push_opt("preint", args.preint.as_ref().map(|p| p.display().to_string()));
    digest.push("camera", &camera_text);
    digest.push("size", format!("{width}x{height}"));
    digest.push("spv", settings.samples_per_voxel);
    digest.push("mode", if segment_mode == SegmentMode::SingleSample { "single" } else { "preint" });
    digest.push("interp", interpolation.name());
    digest.push("jitter", if jitter_on { "on" } else { "off" });
    digest.push("seed", seed);
    digest.push("boundary", if boundary == BoundaryMode::Truncate { "truncate" } else { "partial" });
    digest.push_opt("ert", args.ert);
    digest.push_opt("adaptive", args.adaptive.as_ref());
    digest.push_opt("clip", args.clip.as_ref());
    digest.push("mip", mip_level);
    digest.push("opacity_correction", if correction { "on" } else { "off" });
    digest.push("out", out.display());
    announce(&digest);

    let fb = with_threads(args.threads, || parallel::render_frame(&scene, &camera, &settings))??;
    write_image(&fb, &out)?;
    write_settings_sidecar(&out, &digest)?;
    println!("wrote {}", out.display());
    Ok(0)
}

fn write_image(fb: &Framebuffer, out: &Path) -> Result<()> {
    match out.extension().and_then(|e| e.to_str()) {
        Some("pfm") => image::write_pfm(fb, out),
        Some("ppm") => image::write_ppm(fb, out),
        other => Err(usage(format!(
            "output image must end in .pfm or .ppm, got {:?}",
            other.unwrap_or("")
        ))),
    }
}

fn read_image(path: &Path) -> Result<Framebuffer> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pfm") => image::read_pfm(path),
        Some("ppm") => image::read_ppm(path),
        other => Err(usage(format!(
            "input image must end in .pfm or .ppm, got {:?}",
            other.unwrap_or("")
        ))),
    }
}

// --- compare -------------------------------------------------------------

fn cmd_compare(args: CompareArgs) -> Result<i32> {
    let a = read_image(&args.a)?;
    let b = read_image(&args.b)?;
    let mse = quality::mse(&a, &b)?;

    let mut digest = SettingsDigest::new("compare");
    digest.push("a", args.a.display());
    digest.push("b", args.b.display());
    digest.push_opt("min_psnr", args.min_psnr);
    announce(&digest);

    let mut banding = 0.0;
    let mut anisotropy = 0.0;
    let mut notes = format!("a={};b={}", args.a.display(), args.b.display());
    if let Some(center) = &args.banding_center {
        let v = parse_f64_list(center, "banding_center")?;
        if v.len() != 2 {
            return Err(usage("banding_center needs 'x,y'"));
        }
        let ba = quality::banding_energy(&a, (v[0], v[1]));
        banding = quality::banding_energy(&b, (v[0], v[1]));
        notes.push_str(&format!(";banding(a)={ba:.6e}"));
        println!("banding_energy: a={ba:.6e} b={banding:.6e}");
    }
    if let Some(circle) = &args.anisotropy {
        let v = parse_f64_list(circle, "anisotropy")?;
        if v.len() != 3 {
            return Err(usage("anisotropy needs 'x,y,radius'"));
        }
        let aa = quality::angular_anisotropy(&a, (v[0], v[1]), v[2])?;
        anisotropy = quality::angular_anisotropy(&b, (v[0], v[1]), v[2])?;
        notes.push_str(&format!(";anisotropy(a)={aa:.6e}"));
        println!("anisotropy: a={aa:.6e} b={anisotropy:.6e}");
    }
    let report = quality::QualityReport::new(mse, banding, anisotropy, notes);
    if report.psnr_db.is_infinite() {
        println!("mse: 0");
        println!("psnr_db: inf");
    } else {
        println!("mse: {:.10e}", report.mse);
        println!("psnr_db: {:.4}", report.psnr_db);
    }

    if let Some(csv) = &args.csv {
        let scene = args.scene_id.as_deref().unwrap_or("compare");
        crate::io::report::append_quality_csv(csv, scene, &digest.hash_hex(), &report)?;
    }

    if let Some(min) = args.min_psnr {
        if report.psnr_db < min {
            return Err(Error::Validation(format!(
                "PSNR {:.4} dB below the required {min} dB",
                report.psnr_db
            )));
        }
    }
    Ok(0)
}

// --- bench ---------------------------------------------------------------

fn bench_scene_volume(n: usize) -> Result<ScalarVolume> {
    let c = (n - 1) as f64 / 2.0;
    let spec = PhantomSpec::smooth(
        PhantomKind::SphereShell {
            center: [c, c, c],
            inner_radius: 0.0,
            outer_radius: n as f64 * 0.35,
            interior_value: 0.9,
            shell_value: 0.9,
        },
        n as f64 * 0.05,
    );
    Ok(make_phantom(&spec, (n, n, n), (1.0, 1.0, 1.0))?)
}

fn bench_step_tf() -> Result<volren_core::transfer::TransferFunction> {
    let entries: Vec<[f64; 4]> = (0..256)
        .map(|i| if i < 128 { [0.0; 4] } else { [1.0, 0.8, 0.6, 0.35] })
        .collect();
    Ok(volren_core::transfer::TransferFunction::new(entries, 1.0)?)
}

fn cmd_bench(mut args: BenchArgs) -> Result<i32> {
    let cfg = load_config(&args.config)?;
    merge_string(&mut args.scenario, &cfg, "scenario");
    merge_string(&mut args.size, &cfg, "size");
    merge_string(&mut args.spv_list, &cfg, "spv_list");
    merge_string(&mut args.modes, &cfg, "modes");
    merge_string(&mut args.resolutions, &cfg, "resolutions");
    merge_string(&mut args.sizes, &cfg, "sizes");
    merge_path(&mut args.csv, &cfg, "csv");
    merge_parse(&mut args.dims, &cfg, "dims")?;
    merge_parse(&mut args.reps, &cfg, "reps")?;
    merge_parse(&mut args.warmup, &cfg, "warmup")?;
    merge_parse(&mut args.threads, &cfg, "threads")?;

    let scenario = require(args.scenario, "scenario")?;
    let bench_cfg = BenchConfig {
        repetitions: args.reps.unwrap_or(5),
        warmup: args.warmup.unwrap_or(1),
    };
    let n = args.dims.unwrap_or(64);

    let mut digest = SettingsDigest::new("bench");
    digest.push("scenario", &scenario);
    digest.push("dims", n);
    digest.push("reps", bench_cfg.repetitions);
    digest.push("warmup", bench_cfg.warmup);
    digest.push_opt("threads", args.threads);
    announce(&digest);

    let records = match scenario.as_str() {
        "samples" => {
            let vol = bench_scene_volume(n)?;
            let tf = bench_step_tf()?;
            let coeffs = parallel::prefilter_bspline_coefficients(&vol)?;
            let table = parallel::build_preintegration_table(&tf, 1.0, 256, 64)?;
            let scene = Scene {
                volume: &vol,
                pyramid: None,
                coefficients: Some(&coeffs),
                transfer: &tf,
                preintegration: Some(&table),
            };
            let (w, h) = parse_size(args.size.as_deref().unwrap_or("128x128"))?;
            let c = (n - 1) as f64 / 2.0;
            let camera = Camera::new(
                Vec3::new(c, c, n as f64 * 4.0),
                Vec3::new(c, c, c),
                Vec3::new(0.0, 1.0, 0.0),
                Projection::Orthographic { height: n as f64 * 1.25 },
                w,
                h,
            )?;
            let spv_list = parse_f64_list(args.spv_list.as_deref().unwrap_or("1,2,4,8"), "spv_list")?;
            let mode_names = args.modes.clone().unwrap_or_else(|| "simple,preint,tricubic,preint-tricubic".into());
            let mut variants = Vec::new();
            for name in mode_names.split(',').map(str::trim) {
                let settings = match name {
                    "simple" => RenderSettings::default(),
                    "preint" => RenderSettings {
                        segment_mode: SegmentMode::Preintegrated,
                        ..RenderSettings::default()
                    },
                    "tricubic" => RenderSettings {
                        interpolation: InterpolationMode::TricubicBspline,
                        ..RenderSettings::default()
                    },
                    "preint-tricubic" => RenderSettings {
                        segment_mode: SegmentMode::Preintegrated,
                        interpolation: InterpolationMode::TricubicBspline,
                        ..RenderSettings::default()
                    },
                    other => return Err(usage(format!("unknown bench mode '{other}'"))),
                };
                variants.push(BenchVariant { label: name.to_string(), settings });
            }
            with_threads(args.threads, || {
                bench_samples_sweep(&scene, &camera, &variants, &spv_list, &bench_cfg)
            })??
        }
        "resolution" => {
            let vol = bench_scene_volume(n)?;
            let tf = bench_step_tf()?;
            let scene = Scene::simple(&vol, &tf);
            let c = (n - 1) as f64 / 2.0;
            let camera = Camera::new(
                Vec3::new(c, c, n as f64 * 4.0),
                Vec3::new(c, c, c),
                Vec3::new(0.0, 1.0, 0.0),
                Projection::Orthographic { height: n as f64 * 1.25 },
                512,
                512,
            )?;
            let text = args
                .resolutions
                .unwrap_or_else(|| "512x512,800x600,1024x768,1280x1024,1920x1080".into());
            let mut resolutions = Vec::new();
            for part in text.split(',') {
                resolutions.push(parse_size(part.trim())?);
            }
            with_threads(args.threads, || {
                bench_resolution_sweep(&scene, &camera, &resolutions, &RenderSettings::default(), &bench_cfg)
            })??
        }
        "prefilter" => {
            let text = args.sizes.unwrap_or_else(|| "96,128".into());
            let mut sizes = Vec::new();
            for part in text.split(',') {
                sizes.push(
                    part.trim()
                        .parse::<usize>()
                        .map_err(|_| usage(format!("bad size '{part}'")))?,
                );
            }
            with_threads(args.threads, || bench_prefilter(&sizes, &bench_cfg))??
        }
        other => return Err(usage(format!("unknown scenario '{other}'"))),
    };

    let csv = bench_csv(&records);
    match &args.csv {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| Error::io(path, e))?;
            write_settings_sidecar(path, &digest)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(0)
}
