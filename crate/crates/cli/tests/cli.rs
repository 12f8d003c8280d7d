use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nc-stokes"))
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path
}

fn run(dir: &TempDir, json: &str, args: &[&str]) -> Output {
    let cfg = write_config(dir.path(), json);
    bin()
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap()
}

fn read_json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn mesh_with_circle_has_quads_and_regions() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, r#"{"n": 8}"#, &["mesh", "--deterministic"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let vtk = std::fs::read_to_string(dir.path().join("mesh.vtk")).unwrap();
    let types = vtk.split("CELL_TYPES").nth(1).unwrap();
    assert!(types.lines().any(|l| l == "9") && types.lines().any(|l| l == "5"));
    assert!(vtk.contains("SCALARS region int 1"));
    let stats = read_json(dir.path().join("mesh_stats.json"));
    assert!(stats["quads"].as_u64().unwrap() > 0);
}

#[test]
fn mesh_without_level_set_is_all_triangles() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, r#"{"n": 8, "example": "patch", "levelset": {"kind": "none"}}"#, &["mesh"]);
    assert!(out.status.success());
    let stats = read_json(dir.path().join("mesh_stats.json"));
    assert_eq!(stats["quads"], 0);
    assert_eq!(stats["interface_edges"], 0);
    assert_eq!(stats["triangles"], 128);
}

#[test]
fn invalid_viscosity_exits_with_config_code() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, r#"{"mu1": 0}"#, &["mesh"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu1"));
}

#[test]
fn unknown_key_exits_with_config_code() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, r#"{"viscosity": 1}"#, &["solve"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mesh_assumption_violation_exits_with_mesh_code() {
    // the circle touches the top and bottom boundary edges tangentially
    let dir = TempDir::new().unwrap();
    let json = r#"{"n": 4, "levelset": {"kind": "circle", "center": [0, 0], "radius": 1}}"#;
    let out = run(&dir, json, &["mesh"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn patch_solve_is_exact() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, r#"{"n": 8, "example": "patch"}"#, &["solve", "--deterministic"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(dir.path().join("errors.json"));
    for key in ["err_p_l2", "err_u_l2", "err_u_h1_broken"] {
        assert!(report[key].as_f64().unwrap() <= 1e-9, "{key}: {}", report[key]);
    }
    let vtk = std::fs::read_to_string(dir.path().join("solution.vtk")).unwrap();
    assert!(vtk.contains("nonconforming reconstruction"));
    assert!(vtk.contains("VECTORS velocity double"));
}

#[test]
fn dump_system_writes_matrix_market() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, r#"{"n": 4, "example": "patch"}"#, &["solve", "--dump-system"]);
    assert!(out.status.success());
    for name in ["K.mtx", "A.mtx", "Bx.mtx", "By.mtx", "rhs.mtx"] {
        let text = std::fs::read_to_string(dir.path().join("system").join(name)).unwrap();
        assert!(text.starts_with("%%MatrixMarket"), "{name}");
    }
}

#[test]
fn solver_and_tolerance_flags_override_config() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"n": 8, "mu1": 10, "mu2": 1}"#;
    let out = run(&dir, json, &["solve", "--solver", "iterative", "--tol", "1e-9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(dir.path().join("errors.json"));
    assert_eq!(report["solve"]["method"], "iterative");
    assert!(report["solve"]["relative_residual"].as_f64().unwrap() <= 1e-9);
    let bad = run(&dir, json, &["solve", "--tol", "0.1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn convergence_outputs_are_reproducible() {
    let json = r#"{"mu1": 100, "mu2": 1, "levels": [8, 16]}"#;
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = TempDir::new().unwrap();
        let out = run(&dir, json, &["convergence", "--deterministic"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
        outputs.push((read("convergence.csv"), read("convergence.json"), read("convergence.dat")));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("1/h,p_err,order,u_l2_err,order,u_h1_err,order"));
    assert!(lines.next().unwrap().starts_with("4,"));
    assert!(lines.next().unwrap().starts_with("8,"));
}

#[test]
fn solve_vtk_is_byte_identical_when_deterministic() {
    let json = r#"{"n": 8, "mu1": 10000, "mu2": 1}"#;
    let read = || {
        let dir = TempDir::new().unwrap();
        let out = run(&dir, json, &["solve", "--deterministic"]);
        assert!(out.status.success());
        (
            std::fs::read(dir.path().join("solution.vtk")).unwrap(),
            std::fs::read(dir.path().join("errors.json")).unwrap(),
        )
    };
    assert_eq!(read(), read());
}

#[test]
fn convergence_requires_levels() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, "{}", &["convergence"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("levels"));
}

#[test]
fn infsup_and_element_reports() {
    let dir = TempDir::new().unwrap();
    let out = run(&dir, r#"{"infsup_levels": [4, 8], "s": 0.25, "t": 0.75}"#, &["infsup"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("infsup.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("n,1/h,beta\n4,2,"));
    let out = run(&dir, r#"{"s": 0.25, "t": 0.75}"#, &["element"]);
    assert!(out.status.success());
    let report = read_json(dir.path().join("element.json"));
    let det = report["determinant"].as_f64().unwrap();
    assert!((det - 8.0 / 3.0).abs() < 1e-12);
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = bin()
        .args(["mesh", "--config"])
        .arg(dir.path().join("nope.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
