use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_thinfem")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("thinfem_cli_{tag}_{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(
        &path,
        r#"
[domain]
interval = [0.0, 4.0]

[domain.lower]
constant = 1.0
components = [[0.25, 1.0, 0.0]]
scale_exponent = 0.5

[domain.upper]
constant = 1.0
components = [[0.25, 1.4142135623730951, 0.0]]
scale_exponent = 0.5

[strip]
gamma = 0.25

[strip.height]
constant = 0.5

[forcing]
constant = 1.0

[study]
eps = [0.2, 0.1]
nx = 96
ny_bulk = 4
ny_strip = 2
grid1d = 257
"#,
    )
    .unwrap();
    path
}

#[test]
fn study_runs_and_is_byte_deterministic() {
    let dir = temp_dir("study");
    let config = write_config(&dir);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let output = Command::new(bin())
            .args(["study", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "stdout: {}\nstderr: {}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
        let stdout = String::from_utf8_lossy(&output.stdout);
        assert!(stdout.contains("slope_l2_rescaled"), "{stdout}");
    }
    for name in ["study.csv", "limit.csv"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let a = fs::read(out_a.join("eps_0.2").join("field.csv")).unwrap();
    let b = fs::read(out_b.join("eps_0.2").join("field.csv")).unwrap();
    assert_eq!(a, b);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn mesh_export_round_trips() {
    let dir = temp_dir("mesh");
    let config = write_config(&dir);
    let out = dir.join("out");
    let output = Command::new(bin())
        .args(["mesh", "--config"])
        .arg(&config)
        .args(["--eps", "0.2", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let mesh_path = out.join("eps_0.2").join("mesh.txt");
    let text = fs::read(&mesh_path).unwrap();
    let mesh = thinfem::meshgen::import_mesh(
        &mut std::io::BufReader::new(&text[..]),
        thinfem::meshgen::MeshDomain::Physical,
    )
    .unwrap();
    let mut buffer = Vec::new();
    thinfem::meshgen::export_mesh(&mesh, &mut buffer).unwrap();
    assert_eq!(text, buffer, "mesh file is not export/import stable");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn flag_overrides_reach_the_solver() {
    let dir = temp_dir("flags");
    let config = write_config(&dir);
    let output = Command::new(bin())
        .args(["solve2d", "--config"])
        .arg(&config)
        .args(["--eps", "0.2", "--nx", "48", "--ny-bulk", "3", "--ny-strip", "1"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("nx=48"), "{stdout}");
    // 49 columns x (3 + 1 + 1) levels
    assert!(stdout.contains("vertices=245"), "{stdout}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn means_subcommand_reports_the_table() {
    let dir = temp_dir("means");
    let config = write_config(&dir);
    let out = dir.join("out");
    let output = Command::new(bin())
        .args(["means", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("mu_k=2.000000000000e0"), "{stdout}");
    assert!(stdout.contains("torus_long_dev"), "{stdout}");
    let csv = fs::read_to_string(out.join("means.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("k1_mean,k2_mean,mu_k"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = temp_dir("bad");
    let config = write_config(&dir);
    let missing = Command::new(bin())
        .args(["study", "--config", "/nonexistent/config.toml"])
        .output()
        .unwrap();
    assert!(!missing.status.success());
    let bad_eps = Command::new(bin())
        .args(["study", "--config"])
        .arg(&config)
        .args(["--eps", "0.1,0.2"])
        .output()
        .unwrap();
    assert!(!bad_eps.status.success());
    let bad_domain = Command::new(bin())
        .args(["mesh", "--config"])
        .arg(&config)
        .args(["--domain", "torus"])
        .output()
        .unwrap();
    assert!(!bad_domain.status.success());
    fs::remove_dir_all(&dir).ok();
}
