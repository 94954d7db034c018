use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scispec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scispec"))
        .args(args)
        .env_remove("SCISPEC_WORKERS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    let out = dir.join("out");
    fs::write(&path, format!("out = {:?}\n{body}", out.to_str().unwrap())).unwrap();
    path.to_str().unwrap().to_string()
}

fn point_lines(dir: &Path, n: usize) -> Vec<String> {
    let text = fs::read_to_string(dir.join("out").join(format!("level_{n}.csv"))).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    assert_eq!(lines.remove(0), "re,im");
    lines
}

#[test]
fn gamma1_zero_operator_levels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "levels = [1, 2]\n[operator]\nkind = \"zero\"\n");
    let out = scispec(&["gamma1", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(point_lines(dir.path(), 1).len(), 5);
    let level2 = point_lines(dir.path(), 2);
    assert_eq!(
        level2,
        vec![
            "-5.0000000000000000e-1,0.0000000000000000e0",
            "0.0000000000000000e0,-5.0000000000000000e-1",
            "0.0000000000000000e0,0.0000000000000000e0",
            "0.0000000000000000e0,5.0000000000000000e-1",
            "5.0000000000000000e-1,0.0000000000000000e0",
        ]
    );
    assert!(dir.path().join("out/level_2.meta").exists());
    assert!(dir.path().join("out/level_2.plot").exists());
}

#[test]
fn gamma3_free_level_one_is_whole_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "levels = [1]\n[schrodinger]\npotential = { family = \"zero\" }\n",
    );
    let out = scispec(&["gamma3", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(point_lines(dir.path(), 1).len(), 5);
}

#[test]
fn oracle_compare_reports_no_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "levels = [4]\n[operator]\nkind = \"jacobi\"\ndiagonal = 0.0\noff_diagonal = 1.0\n",
    );
    let out = scispec(&["oracle-compare", "--config", &cfg]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("oracle_mismatches=0"));
}

fn convergence_column(dir: &Path) -> Vec<f64> {
    let text = fs::read_to_string(dir.join("out/convergence.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn converge_zero_operator_to_origin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "levels = [1]\n[operator]\nkind = \"zero\"\n[reference]\nkind = \"points\"\npoints = [[0.0, 0.0]]\n",
    );
    let out = scispec(&["converge", "--config", &cfg, "--n", "2,4,8"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let d = convergence_column(dir.path());
    assert_eq!(d, vec![0.5, 0.25, 0.125]);
}

#[test]
fn converge_alternating_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "levels = [2, 4, 8]\n[operator]\nkind = \"diagonal\"\npattern = [1.0, -1.0]\n[reference]\nkind = \"points\"\npoints = [[-1.0, 0.0], [1.0, 0.0]]\n",
    );
    let out = scispec(&["converge", "--config", &cfg]);
    assert!(out.status.success());
    let d = convergence_column(dir.path());
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn converge_free_laplacian_to_half_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "levels = [2, 4, 8]\naw_terms = 8\n[operator]\nkind = \"laplacian\"\n[reference]\nkind = \"half-line\"\nstart = 0.0\n[window]\ncenter = [0.0, 0.0]\nradius = 10.0\n",
    );
    let out = scispec(&["converge", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let d = convergence_column(dir.path());
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "levels = [2, 1]\n[operator]\nkind = \"zero\"\n");
    let out = scispec(&["gamma1", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("levels"));

    let out = scispec(&["gamma1", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = write_config(dir.path(), "levels = [1]\n");
    let out = scispec(&["gamma3", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schrodinger"));

    let out = scispec(&["gamma1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "levels = [8]\n[operator]\nkind = \"jacobi\"\ndiagonal = 0.0\noff_diagonal = 1.0\n",
    );
    let out = scispec(&["gamma1", "--config", &cfg, "--cap", "4"]);
    assert_eq!(out.status.code(), Some(3));

    // Strict mode needs l(2) = 109 for this problem.
    let cfg = write_config(
        dir.path(),
        "levels = [2]\n[schrodinger]\npotential = { family = \"bump\", amplitude = 0.3938, radius = 1.0 }\nc1_bound = 1.0\n[caps]\nmax_l = 100\n",
    );
    let out = scispec(&["gamma3", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("109"));
}

#[test]
fn outputs_independent_of_worker_count() {
    let body = "levels = [2, 4]\nl = 40\n[schrodinger]\npotential = { family = \"phase-bump\", amplitude = 1.0, radius = 1.0, wavenumber = 2.0 }\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg_a = write_config(a.path(), body);
    let cfg_b = write_config(b.path(), body);
    assert!(scispec(&["gamma3", "--config", &cfg_a, "--workers", "1"])
        .status
        .success());
    let out = Command::new(env!("CARGO_BIN_EXE_scispec"))
        .args(["gamma3", "--config", &cfg_b])
        .env("SCISPEC_WORKERS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    for n in [2, 4] {
        assert_eq!(point_lines(a.path(), n), point_lines(b.path(), n));
    }
}
