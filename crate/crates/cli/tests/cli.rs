use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greenlearn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const TINY_TRAIN: &str = "[train]\nadam_epochs = 3\nlbfgs_max_iters = 4\nhidden = 6, 6\n";

fn small_dataset(dir: &Path, op: &str, seed: &str) {
    ok(&[
        "generate",
        "--operator",
        op,
        "--seed",
        seed,
        "--samples",
        "6",
        "--forcing-points",
        "40",
        "--response-points",
        "20",
        "--out",
        p(dir),
    ]);
}

#[test]
fn help_lists_the_catalog_and_exit_codes() {
    let text = ok(&["--help"]);
    for id in ["helmholtz_K15", "laplace", "schrodinger_propagator", "poisson_disk", "ode_system"] {
        assert!(text.contains(id), "{id}");
    }
    assert!(text.contains("Exit codes"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "--operator", "nope", "--out", "/tmp/x"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "--operator", "laplace"]).status.code(), Some(1));
}

#[test]
fn missing_files_exit_with_three() {
    let d = tempfile::tempdir().unwrap();
    let out = run(&["train", p(&d.path().join("none")), "--out", p(&d.path().join("ck"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn generate_is_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    small_dataset(&a, "laplace", "3");
    small_dataset(&b, "laplace", "3");
    for f in ["manifest.txt", "F.csv", "U.csv", "forcing_grid.csv", "weights_response.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert!(manifest.contains("samples = 6"));
    assert!(manifest.contains("seed = 3"));
}

#[test]
fn default_sizes_follow_the_standard_setup() {
    let d = tempfile::tempdir().unwrap();
    ok(&["generate", "--operator", "laplace", "--out", p(d.path())]);
    let manifest = fs::read_to_string(d.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("samples = 100"));
    assert!(manifest.contains("forcing_points = 200"));
    assert!(manifest.contains("response_points = 100"));
}

#[test]
fn render_manifest_detects_tampering() {
    let d = tempfile::tempdir().unwrap();
    small_dataset(d.path(), "laplace", "1");
    let text = ok(&["render-manifest", p(d.path())]);
    assert!(text.contains("files verified"));
    fs::write(d.path().join("F.csv"), "1,1\n0\n").unwrap();
    assert_eq!(run(&["render-manifest", p(d.path())]).status.code(), Some(3));
    assert_eq!(run(&["train", p(d.path()), "--out", p(&d.path().join("ck"))]).status.code(), Some(3));
}

#[test]
fn train_extract_pipeline() {
    let d = tempfile::tempdir().unwrap();
    let (data, ck, feat) = (d.path().join("data"), d.path().join("ck"), d.path().join("feat"));
    let cfg = d.path().join("cfg.ini");
    fs::write(&cfg, format!("{TINY_TRAIN}[extract]\ngrid_points = 40\neig_count = 5\nsvd_count = 5\npole_resolution = 16\n")).unwrap();
    small_dataset(&data, "laplace", "0");
    let text = ok(&["train", p(&data), "--config", p(&cfg), "--out", p(&ck)]);
    assert!(text.contains("row 0: 7 iterations"), "{text}");
    assert!(ck.join("row0_log.csv").is_file());
    let text = ok(&["extract", p(&ck), "--config", p(&cfg), "--out", p(&feat)]);
    assert!(text.contains("relative_error_percent"), "{text}");
    for f in [
        "report.txt",
        "grid_x.csv",
        "kernel_0_0.csv",
        "eigenvalues_0_0.csv",
        "eigenfunctions_0_0.csv",
        "singular_values_0_0.csv",
        "homogeneous_0.csv",
        "poles_0.csv",
        "phase_0.csv",
    ] {
        assert!(feat.join(f).is_file(), "{f}");
    }
    let kernel = fs::read_to_string(feat.join("kernel_0_0.csv")).unwrap();
    assert!(kernel.starts_with("40,40\n"));
}

#[test]
fn zero_iteration_training_writes_the_initial_network() {
    let d = tempfile::tempdir().unwrap();
    let (data, a, b) = (d.path().join("data"), d.path().join("a"), d.path().join("b"));
    small_dataset(&data, "laplace", "0");
    let cfg = d.path().join("cfg.ini");
    fs::write(&cfg, "[train]\nadam_epochs = 0\nlbfgs_max_iters = 0\n").unwrap();
    ok(&["train", p(&data), "--config", p(&cfg), "--out", p(&a)]);
    ok(&["train", p(&data), "--config", p(&cfg), "--out", p(&b)]);
    let log = fs::read_to_string(a.join("row0_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 2);
    assert_eq!(fs::read(a.join("row0_green0.csv")).unwrap(), fs::read(b.join("row0_green0.csv")).unwrap());
}

#[test]
fn interrupted_training_resumes_to_the_same_checkpoint() {
    let d = tempfile::tempdir().unwrap();
    let data = d.path().join("data");
    small_dataset(&data, "helmholtz_K15", "2");
    let cfg = d.path().join("cfg.ini");
    fs::write(&cfg, TINY_TRAIN).unwrap();
    let (full, part, done) = (d.path().join("full"), d.path().join("part"), d.path().join("done"));
    ok(&["train", p(&data), "--config", p(&cfg), "--seed", "5", "--out", p(&full)]);
    ok(&["train", p(&data), "--config", p(&cfg), "--seed", "5", "--stop-after", "4", "--out", p(&part)]);
    ok(&["train", p(&data), "--config", p(&cfg), "--resume", p(&part), "--out", p(&done)]);
    for f in ["row0_green0.csv", "row0_hom.csv"] {
        assert_eq!(fs::read(full.join(f)).unwrap(), fs::read(done.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn systems_train_and_extract_every_component() {
    let d = tempfile::tempdir().unwrap();
    let (data, ck, feat) = (d.path().join("data"), d.path().join("ck"), d.path().join("feat"));
    small_dataset(&data, "ode_system", "0");
    let cfg = d.path().join("cfg.ini");
    fs::write(&cfg, format!("{TINY_TRAIN}[extract]\ngrid_points = 20\npole_resolution = 8\n")).unwrap();
    ok(&["train", p(&data), "--config", p(&cfg), "--out", p(&ck)]);
    ok(&["extract", p(&ck), "--config", p(&cfg), "--out", p(&feat)]);
    for f in ["kernel_0_0.csv", "kernel_0_1.csv", "kernel_1_0.csv", "kernel_1_1.csv", "homogeneous_1.csv"] {
        assert!(feat.join(f).is_file(), "{f}");
    }
}

#[test]
fn benchmark_writes_a_results_table() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.ini");
    fs::write(
        &cfg,
        format!("operator = laplace\n{TINY_TRAIN}[benchmark]\nnoise = 0, 20\neval_points = 40\n"),
    )
    .unwrap();
    ok(&["benchmark", "noise_sweep", "--config", p(&cfg), "--out", p(d.path())]);
    let table = fs::read_to_string(d.path().join("results.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("suite,parameter,value,seed,error_percent"));
    assert!(lines[2].starts_with("noise_sweep,noise_percent,20,0,"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.ini");
    fs::write(&cfg, "[train]\nlearning_rate = 1\n").unwrap();
    let out = run(&["generate", "--operator", "laplace", "--config", p(&cfg), "--out", p(d.path())]);
    assert_eq!(out.status.code(), Some(1));
}
