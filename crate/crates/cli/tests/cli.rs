use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_robosynth"));
    cmd.env_remove("SYNTH_DETERMINISTIC");
    cmd
}

fn instances() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

const MINIMAL: &str = r#"{
    "dims": {"resources": ["cpu"], "function_dims": ["f"]},
    "devices": [{"id": "pc", "resources": {"cpu": 2}, "cost": 3}],
    "tasks": [{"id": "job", "consumption": {"pc": {"cpu": 1}}}],
    "modules": [{"id": "kit", "devices": ["pc"], "tasks": ["job"], "capability": {"f": 1}, "overhead_cost": 1}],
    "mission": {"requirements": {"f": 1}}
}"#;

fn write_instance(dir: &Path, name: &str, doc: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, doc).unwrap();
    p
}

#[test]
fn synth_minimal_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "minimal.json", MINIMAL);
    let out = run(&["synth", path(&inst), "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sol = read_json(&dir.path().join("minimal.solution.json"));
    assert_eq!(sol["status"], "OPTIMAL");
    // Module overhead 1 plus device 3, plus execution 1/2.
    assert_eq!(sol["objective"], "4.5");
    assert_eq!(sol["values"]["asg_pc_job"], 1);
    let system = read_json(&dir.path().join("minimal.system.json"));
    assert_eq!(system["assignment"]["job"], "pc");
    assert_eq!(system["margins"]["devices"]["pc"]["cpu"], 1);
}

#[test]
fn synth_infeasible_names_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let doc = MINIMAL.replace("\"requirements\": {\"f\": 1}", "\"requirements\": {\"f\": 2}");
    let inst = write_instance(dir.path(), "short.json", &doc);
    let out = run(&["synth", path(&inst), "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("unmet requirement dimensions: f"), "{stdout}");
}

#[test]
fn export_without_solving() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "minimal.json", MINIMAL);
    let lp = dir.path().join("p.lp");
    let mps = dir.path().join("p.mps");
    let out = run(&[
        "synth",
        path(&inst),
        "--export-lp",
        path(&lp),
        "--export-mps",
        path(&mps),
        "--no-solve",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.contains("Minimize") && text.contains("Subject To") && text.ends_with("End\n"));
    assert!(std::fs::read_to_string(&mps).unwrap().contains("ENDATA"));
    assert!(!dir.path().join("minimal.solution.json").exists());
}

#[test]
fn validate_pairs_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instances().join("fixtures/dependency.json");
    assert_eq!(run(&["synth", path(&inst), "--out-dir", path(dir.path())]).status.code(), Some(0));
    let sol_path = dir.path().join("dependency.solution.json");
    let out = run(&["validate", path(&inst), path(&sol_path)]);
    assert_eq!(out.status.code(), Some(0));

    // Switching off the planner's host leaves its assignment dangling.
    let mut sol = read_json(&sol_path);
    sol["values"]["dev_computer"] = 0.into();
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_vec(&sol).unwrap()).unwrap();
    let out = run(&["validate", path(&inst), path(&tampered)]);
    assert_ne!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["ok"], false);
    let tags: Vec<&str> = report["violations"].as_array().unwrap().iter().map(|v| v["tag"].as_str().unwrap()).collect();
    assert!(tags.contains(&"all_active"), "{tags:?}");
}

#[test]
fn validate_warns_on_digest_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instances().join("fixtures/dependency.json");
    run(&["synth", path(&inst), "--out-dir", path(dir.path())]);
    let sol_path = dir.path().join("dependency.solution.json");
    // Same structure, different cost: a different instance.
    let doc = std::fs::read_to_string(&inst).unwrap().replace("\"cost\": 3", "\"cost\": 4");
    let other = write_instance(dir.path(), "other.json", &doc);
    let out = run(&["validate", path(&other), path(&sol_path)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn timeout_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instances().join("shape_19_25_29.json");
    let out = run(&["synth", path(&inst), "--node-limit", "200", "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    let sol = read_json(&dir.path().join("shape_19_25_29.solution.json"));
    assert!(sol["status"].as_str().unwrap().starts_with("TIMEOUT"));
}

#[test]
fn bench_counts_rows() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    std::fs::create_dir(&src).unwrap();
    std::fs::copy(instances().join("fixtures/dependency.json"), src.join("dependency.json")).unwrap();
    let csv_path = dir.path().join("runs.csv");
    let out = run(&["bench", path(&src), "--trials", "3", "-o", path(&csv_path)]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        vec!["instance", "digest", "config", "trial", "status", "objective", "wall_time", "nodes", "version"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[3][3], "mean");
    let objectives: Vec<&str> = rows.iter().map(|r| &r[5]).collect();
    assert!(objectives.iter().all(|o| *o == objectives[0] && !o.is_empty()));
}

#[test]
fn bench_from_generator_spec_records_errors() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"[{"seed": 1, "devices": 3, "tasks": 3, "modules": 2},
            {"seed": 2, "devices": 1, "tasks": 0, "modules": 4}]"#,
    )
    .unwrap();
    let out = run(&["bench", path(&spec), "--trials", "2", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // Header, two trials and a mean, then one error row.
    assert_eq!(lines.len(), 5, "{text}");
    assert!(lines[4].contains("ERROR"));
}

#[test]
fn gen_is_deterministic() {
    let a = run(&["gen", "--seed", "5", "--shape", "4,5,3"]);
    let b = run(&["gen", "--seed", "5", "--shape", "4,5,3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["devices"].as_array().unwrap().len(), 4);
    assert_eq!(doc["tasks"].as_array().unwrap().len(), 5);
    assert_eq!(doc["modules"].as_array().unwrap().len(), 3);
}

#[test]
fn bad_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "broken.json", "{\"dims\": ");
    let out = run(&["synth", path(&inst)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert_eq!(run(&["synth", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn weights_override_and_dummy_mode() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "minimal.json", MINIMAL);
    let out = run(&["synth", path(&inst), "--weights", "0,0,0", "--flow-mode", "dummy", "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let sol = read_json(&dir.path().join("minimal.solution.json"));
    assert_eq!(sol["objective"], "0");
    assert_eq!(sol["flow_mode"], "dummy");
}

#[test]
fn candidates_dump() {
    let out = run(&["candidates", path(&instances().join("fixtures/dependency.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["connections"].as_array().unwrap().len(), 3);
    assert_eq!(doc["links"][0]["id"], "mapper.grid->planner.map");
}
