use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn macroreal(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_macroreal"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn tree_build_k4_lists_sixteen_verified_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tree.json",
        r#"{"name": "tree4", "seed": 7, "experiment": {"kind": "tree_build", "min_k": 4, "max_k": 4,
            "variants": ["simple", "folded"], "operation_trials": 10, "operation_max_k": 4,
            "list_max_k": 4, "norm_states": 8}}"#,
    );
    let out = dir.path().join("report.json");
    let res = macroreal(&["run", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stdout));
    let report = read_json(&out);
    assert_eq!(report["passed"], true);
    for family in report["records"].as_array().unwrap() {
        assert_eq!(family["verified"], true);
        assert_eq!(family["family"].as_array().unwrap().len(), 16);
        assert!(family["region_sizes"]
            .as_array()
            .unwrap()
            .iter()
            .all(|s| s.as_u64().unwrap() <= 8));
    }
}

#[test]
fn werner_thresholds_for_eight_by_eight() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "w.json",
        r#"{"name": "w8", "seed": 3, "experiment": {"kind": "werner_thresholds",
            "caps": [{"n_a": 8, "n_b": 8, "expected": "5/12"}], "region_sizes": [8, 8],
            "classifications": [{"visibility": "5/12", "expected": "no_povm_violation"},
                                {"visibility": 0.5, "expected": "no_projective_violation"}]}}"#,
    );
    let out = dir.path().join("r.json");
    let res = macroreal(&["run", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("(8, 8) -> 5/12"), "{stdout}");
    let report = read_json(&out);
    assert_eq!(report["records"][0]["cap"], "5/12");
    assert_eq!(report["records"][2]["exceeds_cap"], true);
}

#[test]
fn missing_seed_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"name": "bad", "experiment": {"kind": "budget", "cases": []}}"#,
    );
    let res = macroreal(&["run", &cfg], &[]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("schema error") && stderr.contains("seed"), "{stderr}");
}

#[test]
fn failing_check_gives_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "wrong.json",
        r#"{"name": "wrong", "seed": 1, "experiment": {"kind": "budget",
            "cases": [{"region_size": 100, "body": 10, "expected": 11}]}}"#,
    );
    let res = macroreal(&["run", &cfg], &[]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("[FAIL] budgets_exact"));
}

#[test]
fn repeated_runs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "zb.json",
        r#"{"name": "zb", "seed": 11, "experiment": {"kind": "zb_sweep", "min_qubits": 4,
            "max_qubits": 6, "states": 12, "frames_per_partition": 5, "min_region_size": 2,
            "ranks": [1, 3]}}"#,
    );
    let mut texts = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("r{threads}.json"));
        let res = macroreal(
            &["run", &cfg, "--out", out.to_str().unwrap()],
            &[("MACROREAL_THREADS", threads)],
        );
        assert!(res.status.success());
        let mut v = read_json(&out);
        macroreal::report::strip_timing(&mut v);
        texts.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn bad_thread_override_is_rejected() {
    let res = macroreal(&["budget", "--n", "10", "--m", "2"], &[("MACROREAL_THREADS", "zero")]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn tree_verb_draws_the_tree_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("f.json");
    let res = macroreal(&["tree", "--k", "4", "--folded", "--json", json.to_str().unwrap()], &[]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.starts_with("R"), "{stdout}");
    assert_eq!(stdout.matches('#').count(), 16);
    assert!(stdout.contains("anti-commuting: true"));
    let family = read_json(&json);
    assert_eq!(family.as_array().unwrap().len(), 16);
    assert_eq!(family[0][0]["region"], 1);

    let simple = macroreal(&["tree", "--k", "3"], &[]);
    assert!(String::from_utf8_lossy(&simple.stdout).contains("regions: [1, 2, 4]"));
}

#[test]
fn budget_verb() {
    let res = macroreal(&["budget", "--n", "10000000000000000", "--m", "10000000"], &[]);
    assert!(res.status.success());
    assert_eq!(String::from_utf8_lossy(&res.stdout).trim(), "1000000000");
    let res = macroreal(&["budget", "--n", "3", "--m", "4"], &[]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn shipped_configs_load_from_disk() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut names: Vec<String> = std::fs::read_dir(&root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| {
            macroreal::ScenarioConfig::load(&p).unwrap();
            p.file_stem().unwrap().to_string_lossy().into_owned()
        })
        .collect();
    names.sort();
    let shipped: Vec<&str> = macroreal::suite::SHIPPED_CONFIGS.iter().map(|(n, _)| *n).collect();
    assert_eq!(names, shipped);
}

#[test]
fn zb_sweep_exports_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let cfg = write(
        dir.path(),
        "zb.json",
        &format!(
            r#"{{"name": "zb", "seed": 5, "experiment": {{"kind": "zb_sweep", "min_qubits": 4,
                "max_qubits": 5, "states": 4, "frames_per_partition": 3, "min_region_size": 2,
                "ranks": [1], "csv": {}}}}}"#,
            serde_json::to_string(csv_path.to_str().unwrap()).unwrap()
        ),
    );
    assert!(macroreal(&["run", &cfg], &[]).status.success());
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "index,qubits,rank,partitions,max_l,region_a,t_xx,t_xy,t_yx,t_yy"
    );
    assert_eq!(lines.count(), 4);
}
