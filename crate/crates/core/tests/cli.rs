use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_extremal-whittle")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn simulate_then_analyse() {
    let dir = tempfile::tempdir().unwrap();
    let field = path(dir.path(), "mma.csv");
    ok(&["simulate", "--model", "mma", "--n", "24", "--seed", "3", "--phi", "0.5", "--k0", "5", "--out", &field]);

    let ext = path(dir.path(), "ext.csv");
    ok(&["extremogram", "--in", &field, "--m", "6", "--hmax", "2", "--out", &ext]);
    let text = std::fs::read_to_string(&ext).unwrap();
    assert!(text.starts_with("h1,h2,gamma_hat\n"));
    assert_eq!(text.lines().count(), 1 + 25);

    let centered = ok(&["extremogram", "--in", &field, "--m", "6", "--hmax", "1", "--centered"]);
    assert_eq!(centered.lines().count(), 1 + 9);

    let per = ok(&["periodogram", "--in", &field, "--m", "6"]);
    assert!(per.starts_with("j1,j2,lambda1,lambda2,value\n"));
    assert_eq!(per.lines().count(), 1 + 24 * 24);

    let est = ok(&["estimate", "--in", &field, "--family", "mma", "--m", "8", "--lo", "0.05", "--hi", "0.95"]);
    let row: Vec<&str> = est.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "whittle");
    let theta: f64 = row[3].parse().unwrap();
    assert!((0.05..=0.95).contains(&theta));
}

#[test]
fn pairwise_estimate_on_brown_resnick() {
    let dir = tempfile::tempdir().unwrap();
    let field = path(dir.path(), "br.bin");
    ok(&["simulate", "--model", "br-truncated", "--n", "12", "--seed", "1", "--terms", "200", "--out", &field]);
    let est = ok(&["estimate", "--in", &field, "--family", "br", "--pairwise", "--dmax", "1.5"]);
    assert!(est.lines().nth(1).unwrap().starts_with("pairwise,brown-resnick,0,"));
    let out = run(&["estimate", "--in", &field, "--family", "mma", "--pairwise"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn experiment_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "exp.toml");
    std::fs::write(
        &cfg,
        "model = \"mma\"\nn = 12\nreplications = 3\nm_values = [4]\nfamily = \"mma\"\nseed = 1\nphi = 0.5\nk0 = 2\n",
    )
    .unwrap();
    let out = path(dir.path(), "out");
    let summary = ok(&["experiment", "--config", &cfg, "--workers", "2", "--out", &out]);
    assert!(summary.starts_with("estimator,m,count"));
    for f in ["raw.csv", "summary.csv", "boxplot.csv"] {
        assert!(Path::new(&out).join(f).exists(), "{f}");
    }
    let raw = std::fs::read_to_string(Path::new(&out).join("raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 4);
}

#[test]
fn check_spectral_reports_minimum() {
    let line = ok(&["check-spectral", "--family", "br", "--hurst", "0.5", "--resolution", "64"]);
    assert!(line.starts_with("min="));
    let out = run(&["check-spectral", "--family", "mma", "--phi", "1.0", "--resolution", "64"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("min="));
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let out = run(&["periodogram", "--in", "/nonexistent/field.csv", "--m", "4"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let dir = tempfile::tempdir().unwrap();
    let field = path(dir.path(), "f.csv");
    ok(&["simulate", "--model", "mma", "--n", "8", "--out", &field]);
    let out = run(&["extremogram", "--in", &field, "--m", "1", "--hmax", "2"]);
    assert!(!out.status.success());
    assert!(run(&["simulate", "--model", "nope", "--n", "8", "--out", &field]).status.code() != Some(0));
}
