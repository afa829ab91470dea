//! Wall-clock benchmark harness for the quality/performance trade-offs.
//!
//! Absolute timings are hardware bound, so the harness is built for
//! orderings and monotone trends: every scenario reports the median of
//! several repetitions after warmup, and a timed run is accepted only after
//! its output has been verified against the untimed sequential reference.

use std::time::Instant;

use volren_core::camera::Camera;
use volren_core::phantom::{make_phantom, PhantomKind, PhantomSpec};
use volren_core::raycast::{Framebuffer, RenderSettings, Scene};

use crate::digest::SettingsDigest;
use crate::error::{Error, Result};
use crate::parallel;

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    /// Timed repetitions per scenario; the median is reported.
    pub repetitions: usize,
    /// Untimed runs before measurement starts.
    pub warmup: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { repetitions: 5, warmup: 1 }
    }
}

impl BenchConfig {
    fn validate(&self) -> Result<()> {
        if self.repetitions < 3 {
            return Err(Error::Validation(format!(
                "benchmarks need >= 3 repetitions, got {}",
                self.repetitions
            )));
        }
        if self.warmup < 1 {
            return Err(Error::Validation("benchmarks need >= 1 warmup run".into()));
        }
        Ok(())
    }
}

/// One timed scenario.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub scenario: String,
    pub mode: String,
    pub volume_dims: (usize, usize, usize),
    pub resolution: (usize, usize),
    pub samples_per_voxel: f64,
    pub median_ms: f64,
    pub repetitions: usize,
    pub warmup: usize,
    pub parallelism: usize,
    pub digest: String,
}

/// A labelled settings variant for the sweep over render modes.
#[derive(Debug, Clone)]
pub struct BenchVariant {
    pub label: String,
    pub settings: RenderSettings,
}

fn median(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("timings are finite"));
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

fn time_median<F: FnMut()>(mut run: F, cfg: &BenchConfig) -> f64 {
    for _ in 0..cfg.warmup {
        run();
    }
    let samples: Vec<f64> = (0..cfg.repetitions)
        .map(|_| {
            let start = Instant::now();
            run();
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    median(samples)
}

fn render_digest(scenario: &str, label: &str, spv: f64, resolution: (usize, usize)) -> String {
    let mut d = SettingsDigest::new("bench");
    d.push("scenario", scenario);
    d.push("mode", label);
    d.push("spv", spv);
    d.push("resolution", format!("{}x{}", resolution.0, resolution.1));
    d.hash_hex()
}

/// Verify the parallel render against the sequential reference, then time
/// the parallel path.
fn timed_render(
    scenario: &str,
    label: &str,
    scene: &Scene,
    camera: &Camera,
    settings: &RenderSettings,
    cfg: &BenchConfig,
) -> Result<BenchRecord> {
    let reference = volren_core::raycast::render_frame(scene, camera, settings)?;
    let parallel_fb = parallel::render_frame(scene, camera, settings)?;
    if reference != parallel_fb {
        return Err(Error::Validation(format!(
            "scenario '{scenario}/{label}': parallel output differs from reference; timing rejected"
        )));
    }
    let ms = time_median(
        || {
            let fb = parallel::render_frame(scene, camera, settings).expect("validated settings");
            std::hint::black_box(&fb);
        },
        cfg,
    );
    Ok(BenchRecord {
        scenario: scenario.to_string(),
        mode: label.to_string(),
        volume_dims: scene.volume.dims(),
        resolution: camera.viewport(),
        samples_per_voxel: settings.samples_per_voxel,
        median_ms: ms,
        repetitions: cfg.repetitions,
        warmup: cfg.warmup,
        parallelism: rayon::current_num_threads(),
        digest: render_digest(scenario, label, settings.samples_per_voxel, camera.viewport()),
    })
}

/// Frame time as a function of samples per voxel, one record per
/// (mode, spv) pair. Early termination stays off so the sweep measures the
/// marching cost alone.
pub fn bench_samples_sweep(
    scene: &Scene,
    camera: &Camera,
    variants: &[BenchVariant],
    spv_list: &[f64],
    cfg: &BenchConfig,
) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    if spv_list.is_empty() {
        return Err(Error::Validation("samples-per-voxel list is empty".into()));
    }
    let mut records = Vec::new();
    for variant in variants {
        for &spv in spv_list {
            let mut settings = variant.settings.clone();
            settings.samples_per_voxel = spv;
            settings.early_termination_epsilon = None;
            records.push(timed_render("samples_sweep", &variant.label, scene, camera, &settings, cfg)?);
        }
    }
    Ok(records)
}

/// Frame time as a function of output resolution at fixed settings.
pub fn bench_resolution_sweep(
    scene: &Scene,
    camera: &Camera,
    resolutions: &[(usize, usize)],
    settings: &RenderSettings,
    cfg: &BenchConfig,
) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    if resolutions.is_empty() {
        return Err(Error::Validation("resolution list is empty".into()));
    }
    let mut records = Vec::new();
    for &(w, h) in resolutions {
        let cam = camera.with_viewport(w, h)?;
        records.push(timed_render("resolution_sweep", "fixed_settings", scene, &cam, settings, cfg)?);
    }
    Ok(records)
}

/// Phantom used by the prefilter benchmark.
fn prefilter_volume(n: usize) -> Result<volren_core::volume::ScalarVolume> {
    let c = (n - 1) as f64 / 2.0;
    let spec = PhantomSpec::smooth(
        PhantomKind::SphereShell {
            center: [c, c, c],
            inner_radius: n as f64 / 8.0,
            outer_radius: n as f64 / 3.0,
            interior_value: 0.2,
            shell_value: 0.9,
        },
        2.0,
    );
    Ok(make_phantom(&spec, (n, n, n), (1.0, 1.0, 1.0))?)
}

/// Time the sequential and data-parallel coefficient prefilter on cubic
/// volumes of the given edge lengths. Outputs must agree within 1e-6 before
/// any timing is accepted; two records per size.
pub fn bench_prefilter(sizes: &[usize], cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    if sizes.is_empty() {
        return Err(Error::Validation("size list is empty".into()));
    }
    let mut records = Vec::new();
    for &n in sizes {
        let vol = prefilter_volume(n)?;
        let sequential = volren_core::interp::prefilter_bspline_coefficients(&vol)?;
        let parallel_out = parallel::prefilter_bspline_coefficients(&vol)?;
        let worst = sequential
            .data()
            .iter()
            .zip(parallel_out.data())
            .map(|(&a, &b)| (a as f64 - b as f64).abs())
            .fold(0.0f64, f64::max);
        if worst > 1e-6 {
            return Err(Error::Validation(format!(
                "prefilter implementations disagree by {worst} on {n}^3; timing rejected"
            )));
        }
        let simple_ms = time_median(
            || {
                let c = volren_core::interp::prefilter_bspline_coefficients(&vol).expect("valid dims");
                std::hint::black_box(&c);
            },
            cfg,
        );
        let parallel_ms = time_median(
            || {
                let c = parallel::prefilter_bspline_coefficients(&vol).expect("valid dims");
                std::hint::black_box(&c);
            },
            cfg,
        );
        for (label, ms) in [("prefilter_simple", simple_ms), ("prefilter_parallel", parallel_ms)] {
            records.push(BenchRecord {
                scenario: "prefilter".to_string(),
                mode: label.to_string(),
                volume_dims: (n, n, n),
                resolution: (0, 0),
                samples_per_voxel: 0.0,
                median_ms: ms,
                repetitions: cfg.repetitions,
                warmup: cfg.warmup,
                parallelism: if label == "prefilter_simple" { 1 } else { rayon::current_num_threads() },
                digest: render_digest("prefilter", label, 0.0, (n, n)),
            });
        }
    }
    Ok(records)
}

/// CSV dump: one row per record.
pub fn bench_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(
        "scenario,mode,volume,resolution,spv,median_ms,repetitions,warmup,parallelism,digest\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{}x{}x{},{}x{},{},{:.4},{},{},{},{}\n",
            r.scenario,
            r.mode,
            r.volume_dims.0,
            r.volume_dims.1,
            r.volume_dims.2,
            r.resolution.0,
            r.resolution.1,
            r.samples_per_voxel,
            r.median_ms,
            r.repetitions,
            r.warmup,
            r.parallelism,
            r.digest
        ));
    }
    out
}

/// Reference output check used by render benches, exposed for reuse:
/// sequential and parallel renders of the same inputs must be identical.
pub fn verify_render_determinism(scene: &Scene, camera: &Camera, settings: &RenderSettings) -> Result<Framebuffer> {
    let reference = volren_core::raycast::render_frame(scene, camera, settings)?;
    let parallel_fb = parallel::render_frame(scene, camera, settings)?;
    if reference != parallel_fb {
        return Err(Error::Validation("parallel render differs from sequential reference".into()));
    }
    Ok(reference)
}
