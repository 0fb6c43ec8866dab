use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ids-lab"));
    c.env_remove("IDS_LAB_WORKERS");
    c
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).arg("--no-plots").output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("cfg.json");
    std::fs::write(&p, body).unwrap();
    p
}

const ALLOY: &str = r#"{
  "model": {
    "cell": { "dim": 1, "vertex_weights": [1.0], "cross_bonds": [{ "from": 0, "offset": [1], "to": 0 }] },
    "potential": {
      "coupling": { "kind": "uniform", "a": 0.0, "b": 1.0 },
      "single_site": [{ "offset": [0], "vertex": 0, "value": 1.0 }]
    }
  },
  "experiments": [EXPERIMENTS],
  "run": { "seed": 3 }
}"#;

fn alloy(experiments: &str) -> String {
    ALLOY.replace("EXPERIMENTS", experiments)
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn validate_accepts_bundled_configs() {
    for name in ["oracle-vs-exhaustion.json", "alloy-line.json", "ladder-alloy-metric.json", "square-lattice.json"] {
        let out = bin().arg("validate").arg(bundled(name)).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn non_monotone_grid_exits_2_naming_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &alloy(r#"{ "estimator": "bracket", "name": "b", "lambdas": [0.0, 2.0, 1.0], "samples": 10 }"#),
    );
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("experiments[0].lambdas"), "{err}");
}

#[test]
fn syntax_errors_report_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"model\": {\n    \"cell\": ,\n}");
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn oracle_on_random_model_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &alloy(""));
    let out = run(&["oracle", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("default-oracle") && err.contains("periodic"), "{err}");
}

#[test]
fn wegner_without_enough_rows_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &alloy(r#"{ "estimator": "wegner", "name": "gap", "energy": 20.0, "epsilons": [0.1, 0.2], "sides": [4, 8], "samples": 5 }"#),
    );
    let out = run(&["wegner", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`gap`") && err.contains("usable"), "{err}");
}

#[test]
fn bracket_csv_is_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &alloy(""));
    let out_dir = dir.path().join("o");
    let out = run(&["bracket", cfg.to_str().unwrap()], &out_dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_dir.join("default-bracket.csv")).unwrap();
    assert!(text.starts_with("# config_hash="));
    assert_eq!(text.lines().nth(1), Some("lambda,lower,lower_se,upper,upper_se"));
    assert!(!text.contains('\r'));
    for row in csv_rows(&out_dir.join("default-bracket.csv")) {
        assert!(row[1] <= row[3], "{row:?}");
    }
}

#[test]
fn oracle_vs_exhaustion_final_error_is_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", bundled("oracle-vs-exhaustion.json").to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("free-line.convergence.csv"));
    assert!(rows.last().unwrap()[5] < 0.02);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1);
    assert!(manifest["config_hash"].as_str().unwrap().len() == 16);
    assert!(manifest["wall_time_s"].as_f64().is_some());
    assert_eq!(manifest["experiments"].as_array().unwrap().len(), 3);
}

#[test]
fn plots_are_written_unless_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &alloy(r#"{ "estimator": "selfavg", "name": "s", "lambda": 2.0, "radii": [2, 4], "samples": 10 }"#),
    );
    let with = dir.path().join("with");
    let out = bin().args(["selfavg", cfg.to_str().unwrap(), "--out"]).arg(&with).output().unwrap();
    assert!(out.status.success());
    assert!(std::fs::read_to_string(with.join("s.svg")).unwrap().starts_with("<svg"));
    let without = dir.path().join("without");
    assert!(run(&["selfavg", cfg.to_str().unwrap()], &without).status.success());
    assert!(!without.join("s.svg").exists());
}

#[test]
fn seed_flag_changes_results_and_env_sets_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &alloy(r#"{ "estimator": "bracket", "name": "b", "lambdas": { "start": 0.0, "stop": 4.0, "points": 9 }, "samples": 50 }"#),
    );
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&["run", cfg], &a).status.success());
    assert!(run(&["run", cfg, "--seed", "99"], &b).status.success());
    assert_ne!(std::fs::read(a.join("b.csv")).unwrap(), std::fs::read(b.join("b.csv")).unwrap());

    let c = dir.path().join("c");
    let out = bin().args(["run", cfg, "--no-plots", "--out"]).arg(&c).env("IDS_LAB_WORKERS", "3").output().unwrap();
    assert!(out.status.success());
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(c.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["workers"], 3);
    assert_eq!(std::fs::read(a.join("b.csv")).unwrap(), std::fs::read(c.join("b.csv")).unwrap());

    let bad = bin().args(["run", cfg, "--out"]).arg(dir.path().join("d")).env("IDS_LAB_WORKERS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
