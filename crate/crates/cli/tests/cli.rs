//! End-to-end tests of the hdsft binary: command contracts, exit codes,
//! determinism, and the shipped reference instance.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hdsft"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn zero_wall_time(doc: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(doc).expect("valid json");
    v["wall_time_ms"] = serde_json::json!(0.0);
    serde_json::to_string(&v).unwrap()
}

#[test]
fn gen_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.json");
    let p2 = dir.path().join("b.json");
    run_ok(
        bin()
            .args(["gen", "--seed", "7", "--k", "3", "--d", "2"])
            .arg("--out")
            .arg(&p1),
    );
    run_ok(
        bin()
            .args(["gen", "--seed", "7", "--k", "3", "--d", "2"])
            .arg("--out")
            .arg(&p2),
    );
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p2).unwrap();
    assert_eq!(a, b, "same seed must generate byte-identical specs");
    let spec = hdsft_core::model::SignalSpec::from_json(&String::from_utf8(a).unwrap()).unwrap();
    spec.validate().unwrap();
    assert_eq!(spec.tones.len(), 3);
}

#[test]
fn gen_rejects_unpackable_gap() {
    // k = 2 with eta > 2M√d: infeasible-instance, exit 2.
    let out = bin()
        .args([
            "gen", "--seed", "1", "--k", "2", "--d", "2", "--M", "1.0", "--eta", "3.0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("infeasible instance"), "stderr: {stderr}");
}

#[test]
fn run_reference_instance_recalls_everything() {
    let dir = tempfile::tempdir().unwrap();
    let doc_path = dir.path().join("result.json");
    let out = run_ok(
        bin()
            .args([
                "run", "--seed", "1", "--T", "64", "--F", "256", "--s", "16", "--N", "9170",
            ])
            .arg("--spec")
            .arg(fixture("reference_spec.json"))
            .arg("--out")
            .arg(&doc_path),
    );
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("recall 1.000"), "summary: {summary}");
    let doc = std::fs::read_to_string(&doc_path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
    assert_eq!(v["recovered"].as_array().unwrap().len(), 2);
    assert_eq!(v["seed"], 1);
    assert!(v["total_signal_samples"].as_u64().unwrap() > 0);
    assert_eq!(v["hash"]["sigma_b"], -1);
}

#[test]
fn run_is_deterministic_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("r1.json");
    let p2 = dir.path().join("r2.json");
    for p in [&p1, &p2] {
        run_ok(
            bin()
                .args([
                    "run", "--seed", "9", "--T", "64", "--F", "256", "--s", "16", "--N", "4096",
                ])
                .arg("--spec")
                .arg(fixture("reference_spec.json"))
                .arg("--out")
                .arg(p),
        );
    }
    let a = zero_wall_time(&std::fs::read_to_string(&p1).unwrap());
    let b = zero_wall_time(&std::fs::read_to_string(&p2).unwrap());
    assert_eq!(
        a, b,
        "same seed must produce identical documents (wall time aside)"
    );
}

#[test]
fn run_does_not_mutate_inputs() {
    let before = std::fs::read(fixture("reference_spec.json")).unwrap();
    run_ok(
        bin()
            .args([
                "run", "--seed", "2", "--T", "64", "--F", "256", "--s", "16", "--N", "4096",
            ])
            .arg("--spec")
            .arg(fixture("reference_spec.json")),
    );
    let after = std::fs::read(fixture("reference_spec.json")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn run_missing_spec_exits_2_and_names_path() {
    let out = bin()
        .args(["run", "--spec", "/no/such/spec.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/no/such/spec.json"), "stderr: {stderr}");
}

#[test]
fn config_file_drives_run_and_flags_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    let doc_path = dir.path().join("out.json");
    let config = serde_json::json!({
        "spec": fixture("reference_spec.json"),
        "seed": 3,
        "restarts": 4,
        "overrides": {"T": 64.0, "F": 256.0, "s": 16, "N": 4096}
    });
    std::fs::write(&config_path, config.to_string()).unwrap();
    // Flag --seed 5 overrides the file's seed 3.
    run_ok(
        bin()
            .args(["run", "--seed", "5"])
            .arg("--config")
            .arg(&config_path)
            .arg("--out")
            .arg(&doc_path),
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&doc_path).unwrap()).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(v["params"]["N"], 4096);
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(&config_path, "{\"unknown_key\": true}").unwrap();
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn verify_fast_passes_and_flip_hook_fails() {
    let out = run_ok(bin().args(["verify", "--seed", "3"]));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("all checks passed"));
    assert!(table.contains("v2_oracle_equivalence"));

    let flipped = bin()
        .args(["verify", "--seed", "3", "--inject-v2-sign-flip"])
        .output()
        .unwrap();
    assert_eq!(flipped.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&flipped.stdout).contains("[FAIL] v2_oracle_equivalence"));
}

#[test]
fn verify_grid_guard_refuses_with_size_report() {
    let out = bin()
        .args(["verify", "--dense-tf", "4096"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("grid too large") && stderr.contains("4096"),
        "stderr: {stderr}"
    );
}

#[test]
fn sweep_emits_pinned_csv_and_asserts_poly() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("rows.csv");
    run_ok(
        bin()
            .args([
                "sweep",
                "--dims",
                "2,4",
                "--trials",
                "2",
                "--seed",
                "11",
                "--assert-poly",
            ])
            .arg("--out")
            .arg(&csv_path),
    );
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d,k,seed,samples,wall_time_ms,recall,max_freq_error,failed"
    );
    assert_eq!(lines.count(), 4, "2 dims × 2 trials rows");
}

#[test]
fn sweep_single_dim_delegates_to_run() {
    // A dims-{2} sweep cell must reproduce what gen + run produce for the
    // same seed and parameters (the desk-scale sweep policy).
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("one.csv");
    run_ok(
        bin()
            .args(["sweep", "--dims", "2", "--trials", "1", "--seed", "21"])
            .arg("--out")
            .arg(&csv_path),
    );
    let csv1 = std::fs::read_to_string(&csv_path).unwrap();
    run_ok(
        bin()
            .args(["sweep", "--dims", "2", "--trials", "1", "--seed", "21"])
            .arg("--out")
            .arg(&csv_path),
    );
    let csv2 = std::fs::read_to_string(&csv_path).unwrap();
    let strip_wall = |text: &str| -> Vec<String> {
        text.lines()
            .skip(1)
            .map(|l| {
                let mut cols: Vec<&str> = l.split(',').collect();
                cols[4] = "-";
                cols.join(",")
            })
            .collect()
    };
    assert_eq!(strip_wall(&csv1), strip_wall(&csv2));

    // Same instance and parameters through gen + run: identical sample count
    // and a recall-1 row.
    let spec_path = dir.path().join("spec.json");
    let doc_path = dir.path().join("run.json");
    run_ok(
        bin()
            .args([
                "gen", "--seed", "21", "--k", "2", "--d", "2", "--eta", "0.5",
            ])
            .arg("--out")
            .arg(&spec_path),
    );
    run_ok(
        bin()
            .args([
                "run", "--seed", "21", "--T", "64", "--F", "256", "--s", "16", "--N", "9170",
            ])
            .arg("--spec")
            .arg(&spec_path)
            .arg("--out")
            .arg(&doc_path),
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&doc_path).unwrap()).unwrap();
    let row = csv1.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(
        cols[3],
        doc["total_signal_samples"].to_string(),
        "sweep row samples vs run document"
    );
    assert_eq!(cols[5], "1", "sweep row recall");
}
