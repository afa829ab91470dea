//! End-to-end tests of the command-line surface and its exit codes.

use std::path::{Path, PathBuf};

use volren::cli::run;

fn dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("volren-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn p(path: &Path) -> String {
    path.display().to_string()
}

fn cmd(args: &[&str]) -> i32 {
    let mut argv = vec!["volren".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run(argv)
}

fn write_step_tf(path: &Path) {
    let mut text = String::new();
    for i in 0..256 {
        if i < 128 {
            text.push_str("0,0,0,0\n");
        } else {
            text.push_str("1,0.8,0.6,0.4\n");
        }
    }
    std::fs::write(path, text).unwrap();
}

const CAMERA: &str = "pos=15.5,15.5,120;target=15.5,15.5,15.5;up=0,1,0;ortho=40";

#[test]
fn render_pipeline_is_deterministic() {
    let d = dir("determinism");
    let vol = d.join("s.raw");
    let tf = d.join("tf.csv");
    write_step_tf(&tf);
    assert_eq!(
        cmd(&["phantom", "--kind", "sphere_shell", "--dims", "32", "--sigma-edge", "2", "--out", &p(&vol)]),
        0
    );
    let img1 = d.join("a.pfm");
    let img2 = d.join("b.pfm");
    for img in [&img1, &img2] {
        assert_eq!(
            cmd(&[
                "render", "--volume", &p(&vol), "--tf", &p(&tf), "--camera", CAMERA, "--size",
                "48x48", "--spv", "1", "--jitter", "on", "--seed", "11", "--out", &p(img)
            ]),
            0
        );
    }
    let a = std::fs::read(&img1).unwrap();
    let b = std::fs::read(&img2).unwrap();
    assert_eq!(a, b, "same seed must give bit-identical images");
    // outputs carry settings sidecars
    assert!(d.join("a.pfm.settings").exists());
    assert!(d.join("s.raw.settings").exists());
    // identical images compare to the infinity sentinel with exit 0
    assert_eq!(cmd(&["compare", &p(&img1), &p(&img2)]), 0);
}

#[test]
fn flags_and_config_give_identical_output() {
    let d = dir("config");
    let vol = d.join("s.raw");
    let tf = d.join("tf.csv");
    write_step_tf(&tf);
    assert_eq!(
        cmd(&["phantom", "--kind", "sphere_shell", "--dims", "32", "--out", &p(&vol)]),
        0
    );
    let by_flags = d.join("flags.pfm");
    assert_eq!(
        cmd(&[
            "render", "--volume", &p(&vol), "--tf", &p(&tf), "--camera", CAMERA, "--size",
            "40x40", "--spv", "2", "--boundary", "partial", "--out", &p(&by_flags)
        ]),
        0
    );
    let by_config = d.join("config.pfm");
    let config = d.join("render.cfg");
    std::fs::write(
        &config,
        format!(
            "# render settings\nvolume={}\ntf={}\ncamera={CAMERA}\nsize=40x40\nspv=2\nboundary=partial\nout={}\n",
            p(&vol),
            p(&tf),
            p(&by_config)
        ),
    )
    .unwrap();
    assert_eq!(cmd(&["render", "--config", &p(&config)]), 0);
    assert_eq!(std::fs::read(&by_flags).unwrap(), std::fs::read(&by_config).unwrap());

    // a flag overrides the config value
    let by_override = d.join("override.pfm");
    let config2 = d.join("render2.cfg");
    std::fs::write(
        &config2,
        format!(
            "volume={}\ntf={}\ncamera={CAMERA}\nsize=40x40\nspv=1\nout={}\n",
            p(&vol),
            p(&tf),
            p(&by_override)
        ),
    )
    .unwrap();
    assert_eq!(cmd(&["render", "--config", &p(&config2), "--spv", "2"]), 0);
    assert_eq!(std::fs::read(&by_flags).unwrap(), std::fs::read(&by_override).unwrap());
}

#[test]
fn full_pipeline_with_tables_and_coefficients() {
    let d = dir("pipeline");
    let vol = d.join("s.raw");
    let tf = d.join("tf.csv");
    let coeffs = d.join("c.raw");
    let table = d.join("t.raw");
    write_step_tf(&tf);
    assert_eq!(
        cmd(&["phantom", "--kind", "sphere_shell", "--dims", "32", "--sigma-edge", "3", "--out", &p(&vol)]),
        0
    );
    assert_eq!(cmd(&["prefilter", "--volume", &p(&vol), "--out", &p(&coeffs)]), 0);
    assert_eq!(
        cmd(&["preint-table", "--tf", &p(&tf), "--resolution", "64", "--steps", "32", "--out", &p(&table)]),
        0
    );
    let img = d.join("full.ppm");
    assert_eq!(
        cmd(&[
            "render", "--volume", &p(&vol), "--tf", &p(&tf), "--coeffs", &p(&coeffs), "--preint",
            &p(&table), "--camera", CAMERA, "--size", "40x40", "--mode", "preint", "--interp",
            "tricubic", "--ert", "0.001", "--out", &p(&img)
        ]),
        0
    );
    assert!(img.exists());
}

#[test]
fn exit_codes_follow_the_contract() {
    let d = dir("codes");
    let vol = d.join("s.raw");
    let tf = d.join("tf.csv");
    write_step_tf(&tf);
    assert_eq!(cmd(&["phantom", "--kind", "constant", "--value", "0.4", "--dims", "16", "--out", &p(&vol)]), 0);

    // usage errors
    assert_eq!(cmd(&["render", "--bogus"]), 1);
    assert_eq!(
        cmd(&[
            "render", "--interp", "tricubic", "--volume", &p(&vol), "--tf", &p(&tf), "--camera",
            CAMERA, "--size", "8x8", "--out", &p(&d.join("x.pfm"))
        ]),
        1,
        "tricubic without coefficients is a configuration error"
    );
    assert_eq!(cmd(&["phantom", "--kind", "wedge", "--dims", "8", "--out", &p(&d.join("w.raw"))]), 1);

    // I/O errors
    assert_eq!(
        cmd(&[
            "render", "--volume", &p(&d.join("missing.raw")), "--tf", &p(&tf), "--camera", CAMERA,
            "--size", "8x8", "--out", &p(&d.join("x.pfm"))
        ]),
        2
    );

    // validation failures
    let a = d.join("a.pfm");
    let b = d.join("b.pfm");
    for (img, value) in [(&a, "0.3"), (&b, "0.6")] {
        let v = d.join(format!("{value}.raw"));
        assert_eq!(cmd(&["phantom", "--kind", "constant", "--value", value, "--dims", "16", "--out", &p(&v)]), 0);
        assert_eq!(
            cmd(&[
                "render", "--volume", &p(&v), "--tf", &p(&tf), "--camera",
                "pos=7.5,7.5,60;target=7.5,7.5,7.5;up=0,1,0;ortho=20", "--size", "16x16", "--out",
                &p(img)
            ]),
            0
        );
    }
    assert_eq!(cmd(&["compare", &p(&a), &p(&b), "--min-psnr", "90"]), 3);

    // help prints and succeeds
    assert_eq!(cmd(&["--help"]), 0);
}

#[test]
fn compare_emits_quality_csv_rows() {
    let d = dir("csv");
    let vol = d.join("s.raw");
    let tf = d.join("tf.csv");
    write_step_tf(&tf);
    assert_eq!(
        cmd(&["phantom", "--kind", "sphere_shell", "--dims", "32", "--sigma-edge", "2", "--out", &p(&vol)]),
        0
    );
    let a = d.join("a.pfm");
    let b = d.join("b.pfm");
    for (img, spv) in [(&a, "8"), (&b, "1")] {
        assert_eq!(
            cmd(&[
                "render", "--volume", &p(&vol), "--tf", &p(&tf), "--camera", CAMERA, "--size",
                "48x48", "--spv", spv, "--out", &p(img)
            ]),
            0
        );
    }
    let csv = d.join("report.csv");
    assert_eq!(
        cmd(&[
            "compare", &p(&a), &p(&b), "--banding-center", "23.5,23.5", "--anisotropy",
            "23.5,23.5,10", "--csv", &p(&csv), "--scene-id", "sphere-step"
        ]),
        0
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("scene,digest,psnr_db,mse,banding_energy,anisotropy,notes"));
    assert!(text.lines().count() == 2);
    assert!(text.contains("sphere-step"));
}

#[test]
fn bench_writes_csv_records() {
    let d = dir("bench");
    let csv = d.join("bench.csv");
    assert_eq!(
        cmd(&["bench", "--scenario", "prefilter", "--sizes", "12,16", "--reps", "3", "--csv", &p(&csv)]),
        0
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("scenario,mode,volume,resolution,spv,median_ms"));
    assert_eq!(text.lines().count(), 5, "two sizes x two implementations + header");
    assert!(csv.with_extension("csv.settings").exists() || d.join("bench.csv.settings").exists());
}
