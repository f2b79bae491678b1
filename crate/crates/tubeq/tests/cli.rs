use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn tubeq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tubeq"))
        .args(args)
        .current_dir(dir)
        .env("TUBEQ_THREADS", "2")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    std::fs::write(dir.join(name), json).unwrap();
    name.to_string()
}

fn column(csv: &str, col: usize) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn circle_spectrum_matches_the_shifted_fourier_series() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"shape": {"name": "circle", "params": [1.0]}, "grid": [2000], "boundary": "periodic",
            "task": "spectrum", "options": {"eigencount": 5}}"#,
    );
    let out = tubeq(&["spectrum", "--config", &cfg, "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("o/spectrum.csv")).unwrap();
    assert!(text.starts_with("level,eigenvalue,residual\n"));
    let ev = column(&text, 1);
    assert_eq!(ev.len(), 5);
    assert!((ev[0] + 0.25).abs() < 1e-4);
}

#[test]
fn sphere_potential_is_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "p.json", r#"{"shape": {"name": "sphere", "params": [2]}, "grid": [32, 64]}"#);
    let out = tubeq(&["potential", "--config", &cfg], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("potential.csv")).unwrap();
    let v = column(&text, 3);
    assert_eq!(v.len(), 32 * 64);
    assert!(v.iter().all(|x| x.abs() <= 1e-10));
}

#[test]
fn negative_radius_exits_two_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "n.json", r#"{"shape": {"name": "circle", "params": [-1]}, "grid": [64]}"#);
    let out = tubeq(&["spectrum", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shape.params[0]"));
}

#[test]
fn unknown_key_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "u.json", r#"{"shape": {"name": "circle", "params": [1]}, "grdi": [64]}"#);
    let out = tubeq(&["curvature", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grdi"));
}

#[test]
fn mismatched_task_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "t.json", r#"{"shape": {"name": "circle", "params": [1]}, "grid": [64], "task": "squeeze"}"#);
    let out = tubeq(&["spectrum", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_three_with_the_operation() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"shape": {"name": "circle", "params": [1]}, "grid": [64], "options": {"epsilons": [0.95, 0.5, 0.25]}}"#,
    );
    let out = tubeq(&["squeeze", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("squeeze::tube_dirichlet_spectrum"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "h.json",
        r#"{"shape": {"name": "helix", "params": [3, 4]}, "grid": [64],
            "options": {"epsilons": [0.8, 0.4, 0.2], "across": 16, "eigencount": 2}}"#,
    );
    for out in ["a", "b"] {
        assert!(tubeq(&["squeeze", "--config", &cfg, "--out", out], dir.path()).status.success());
    }
    for file in ["squeeze.csv", "squeeze_limits.csv"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let text = std::fs::read_to_string(dir.path().join("a/squeeze.csv")).unwrap();
    assert!(text.starts_with("epsilon,level,raw,transverse,subtracted,extrapolated\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 2);
}

#[test]
fn sampled_curve_from_csv() {
    let dir = TempDir::new().unwrap();
    let mut samples = String::from("s,x,y\n");
    for i in 0..=256 {
        let t = 2.0 * std::f64::consts::PI * i as f64 / 256.0;
        samples.push_str(&format!("{t},{},{}\n", 2.0 * t.cos(), 2.0 * t.sin()));
    }
    std::fs::write(dir.path().join("ring.csv"), samples).unwrap();
    let cfg = write_config(dir.path(), "r.json", r#"{"shape": {"file": "ring.csv"}, "grid": [128], "task": "curvature"}"#);
    let out = tubeq(&["curvature", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("curvature.csv")).unwrap();
    // unit-speed parameter t on a circle of radius 2: κ = 1/2
    assert!(column(&text, 2).iter().all(|k| (k - 0.5).abs() < 1e-5));
}

#[test]
fn dump_matrix_writes_matrix_market() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"shape": {"name": "circle", "params": [1]}, "grid": [32]}"#);
    let out = tubeq(&["spectrum", "--config", &cfg, "--dump-matrix"], dir.path());
    assert!(out.status.success());
    let mtx = std::fs::read_to_string(dir.path().join("hamiltonian.mtx")).unwrap();
    let mut lines = mtx.lines();
    assert_eq!(lines.next(), Some("%%MatrixMarket matrix coordinate real general"));
    assert_eq!(lines.next(), Some("32 32 96"));
    assert_eq!(lines.count(), 96);
}

#[test]
fn verify_passes_and_writes_the_table() {
    let dir = TempDir::new().unwrap();
    let out = tubeq(&["verify"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let table = std::fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(table.lines().skip(1).all(|l| l.ends_with(",pass")));
}

#[test]
fn bad_thread_count_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tubeq"))
        .arg("verify")
        .current_dir(dir.path())
        .env("TUBEQ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
