use std::path::Path;
use std::process::{Command, Output};

use ndwt::io::{load_matrix, read_csv_vector};

fn ndwt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ndwt"))
        .args(args)
        .env_remove("NDWT_MAX_ELEMENTS")
        .output()
        .expect("spawn ndwt")
}

fn ok(args: &[&str]) -> String {
    let out = ndwt(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_vector(p: &Path) -> Vec<f64> {
    read_csv_vector(std::fs::File::open(p).unwrap()).unwrap()
}

#[test]
fn transform_round_trip_1d() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    let coef = dir.path().join("x.ndwt");
    let back = dir.path().join("back.csv");
    ok(&["gen", "noise", "--size", "255", "--seed", "3", "-o", path(&input)]);
    ok(&["transform", "-i", path(&input), "-o", path(&coef), "--filter", "sym10", "--depth", "5", "--shift", "2"]);
    ok(&["transform", "--direction", "inverse", "-i", path(&coef), "-o", path(&back)]);
    let (a, b) = (read_vector(&input), read_vector(&back));
    assert_eq!(a.len(), 255);
    let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-9, "{err}");
}

#[test]
fn csv_coefficients_with_layout_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("img.csv");
    let coef = dir.path().join("coef.csv");
    let back = dir.path().join("back.csv");
    ok(&["gen", "smooth", "--size", "37x51", "-o", path(&input)]);
    ok(&[
        "transform", "-i", path(&input), "-o", path(&coef), "--format", "csv",
        "--filter-rows", "haar", "--filter-cols", "db4", "--depth-rows", "2", "--depth-cols", "3",
    ]);
    let layout = dir.path().join("coef.csv.layout.json");
    assert!(layout.exists());
    let coefficients = load_matrix(&coef).unwrap();
    assert_eq!(coefficients.dim(), (3 * 37, 4 * 51));
    ok(&["transform", "--direction", "inverse", "-i", path(&coef), "--layout", path(&layout), "-o", path(&back)]);
    let (a, b) = (load_matrix(&input).unwrap(), load_matrix(&back).unwrap());
    let err = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-9, "{err}");
}

#[test]
fn truncated_container_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    let coef = dir.path().join("x.ndwt");
    ok(&["gen", "doppler", "--size", "64", "-o", path(&input)]);
    ok(&["transform", "-i", path(&input), "-o", path(&coef), "--depth", "3"]);
    let bytes = std::fs::read(&coef).unwrap();
    std::fs::write(&coef, &bytes[..bytes.len() - 9]).unwrap();
    let out = ndwt(&["transform", "--direction", "inverse", "-i", path(&coef), "-o", path(&dir.path().join("y.csv"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncated"));
}

#[test]
fn guard_trip_exits_4_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    let coef = dir.path().join("x.ndwt");
    ok(&["gen", "doppler", "--size", "100", "-o", path(&input)]);
    let out = ndwt(&["--max-elements", "500", "transform", "-i", path(&input), "-o", path(&coef), "--depth", "2"]);
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("30000 elements required") && stderr.contains("500 allowed"), "{stderr}");
    assert!(!coef.exists());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ndwt(&["gen", "fbm", "--size", "64", "--hurst", "0.5"]).status.code(), Some(2));
    assert_eq!(ndwt(&["transform"]).status.code(), Some(2));
    assert_eq!(ndwt(&["--jobs", "0", "filters"]).status.code(), Some(2));
}

#[test]
fn unknown_filter_lists_supported_names() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    ok(&["gen", "doppler", "--size", "16", "-o", path(&input)]);
    let out = ndwt(&["transform", "-i", path(&input), "-o", path(&dir.path().join("o")), "--filter", "db5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coif18"));
}

#[test]
fn filters_listing() {
    let text = ok(&["filters"]);
    assert_eq!(text, ok(&["filters", "list"]));
    assert!(text.contains("sym20"));
    let json: serde_json::Value = serde_json::from_str(&ok(&["filters", "--format", "json"])).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 20);
}

#[test]
fn generators_are_reproducible() {
    let a = ok(&["gen", "fbf", "--size", "16x8", "--hurst", "0.4", "--seed", "11"]);
    let b = ok(&["gen", "fbf", "--size", "16x8", "--hurst", "0.4", "--seed", "11"]);
    let c = ok(&["gen", "fbf", "--size", "16x8", "--hurst", "0.4", "--seed", "12"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().count(), 16);
}

#[test]
fn compress_proportions_and_entropy_order() {
    let text = ok(&["compress", "--depth", "3", "--proportions"]);
    assert!(text.contains("9/16") && text.contains("3/10"), "{text}");
    let report: serde_json::Value = serde_json::from_str(&ok(&["compress"])).unwrap();
    let mixing = report["entropy_scale_mixing"].as_f64().unwrap();
    let standard = report["entropy_standard"].as_f64().unwrap();
    assert!(mixing < standard, "{mixing} vs {standard}");
}

#[test]
fn spectra_on_generated_field() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("s.svg");
    let text = ok(&["spectra", "--fbf-hurst", "0.5", "--seed", "1", "--seeds", "2", "--svg", path(&svg)]);
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let h = report["hurst"].as_f64().unwrap();
    assert!((0.25..=0.75).contains(&h), "{h}");
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn denoise_reports_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    let out = dir.path().join("y.csv");
    ok(&["gen", "doppler", "--size", "250", "-o", path(&input)]);
    let text = ok(&["denoise", "-i", path(&input), "-o", path(&out), "--sigma", "0.05", "--depth", "6"]);
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((report["threshold"].as_f64().unwrap() - 0.166_154_460_034_364_5).abs() < 1e-12);
    assert_eq!(read_vector(&out).len(), 250);
}

#[test]
fn lena_like_demo_reconstructs() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["demo", "lena-like", "--output-dir", path(dir.path())]);
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(report["max_reconstruction_error"].as_f64().unwrap() < 1e-9);
    for f in ["lena_like_original.csv", "lena_like_reconstructed.csv", "lena_like_coefficients.ndwt", "lena_like.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn doppler_demo_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["demo", "doppler", "--output-dir", path(dir.path())]);
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let expected = (2.0 * (6.0f64 * 250.0).ln()).sqrt() * report["sigma_hat"].as_f64().unwrap();
    assert!((report["threshold"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert_eq!(read_vector(&dir.path().join("doppler_denoised.csv")).len(), 250);
}

#[test]
fn bench_small_config() {
    let text = ok(&["bench", "--sizes", "32x48,40", "--depth", "2", "--filters", "haar,db4", "--repetitions", "3"]);
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    assert!(entries.iter().all(|e| e["status"] == "ok"));
}
