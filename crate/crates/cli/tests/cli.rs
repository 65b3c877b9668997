use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fcrystal"));
    cmd.env_remove("FCRYSTAL_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn analyze_json(path: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["analyze", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn make_family(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut all = vec!["make-family"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["-o", path.to_str().unwrap()]);
    let out = run(&all);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn k3_isoclinic_report() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "k3.json", r#"{"p": 3, "m": 1, "rank": 3, "family": {"kind": "k3-isoclinic", "r": 3}}"#);
    let v = analyze_json(&spec, &[]);
    assert_eq!(v["schema"], "fcrystal-report/1");
    assert_eq!(v["n"]["value"], 2);
    assert_eq!(v["n"]["status"], "Equal");
    assert_eq!(v["n"]["certificate"], "Period(3)");
    assert_eq!(v["level_torsion"]["certificate"], "Period(3)");
    assert_eq!(v["slopes"]["hodge"], serde_json::json!([0, 1, 2]));
    assert_eq!(v["slopes"]["lambda"], "1");
    assert_eq!(v["input"]["precision_rule"], "auto");
    assert_eq!(v["bounds"]["theorem12"], 2);
}

#[test]
fn identity_is_ordinary() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "id.json", r#"{"p": 2, "m": 2, "rank": 2, "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#);
    let v = analyze_json(&spec, &[]);
    assert_eq!(v["n"]["value"], 0);
    assert_eq!(v["slopes"]["ordinary"], true);
    assert_eq!(v["slopes"]["isoclinic"], true);
}

#[test]
fn rank2_upper_bound() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "r2.json", r#"{"p": 5, "m": 1, "rank": 2, "matrix": [[5, 1], [0, "25"]]}"#);
    let v = analyze_json(&spec, &[]);
    assert_eq!(v["slopes"]["newton"], serde_json::json!(["1", "2"]));
    assert_eq!(v["slopes"]["hodge"], serde_json::json!([0, 3]));
    assert_eq!(v["n"]["status"], "UpperBoundOnly");
    assert_eq!(v["n"]["upper_bound"], 2);
    assert_eq!(v["n"]["value"], Value::Null);
    assert_eq!(v["level_torsion"], Value::Null);
}

#[test]
fn table_format_lists_trace_rows() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "c.json", r#"{"p": 2, "m": 1, "rank": 2, "matrix": [[0, 8], [1, 0]]}"#);
    let out = run(&["analyze", spec.to_str().unwrap(), "--format", "table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("1 → (0, 3, 3)"), "{text}");
    assert!(text.contains("2 → (3, 3, 0)"), "{text}");
    assert!(text.contains("n              3 (Equal, Period(2))"), "{text}");
}

#[test]
fn precision_rules() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "c.json", r#"{"p": 2, "m": 1, "rank": 2, "matrix": [[0, 8], [1, 0]]}"#);
    let path = spec.to_str().unwrap();
    // auto: Q = 4·2·4 = 32, N = 32·3 + 2
    let v = analyze_json(&spec, &[]);
    assert_eq!(v["input"]["precision"], 98);
    assert_eq!(v["input"]["auto_precision"], 98);
    let v = analyze_json(&spec, &["--q-max", "4", "--precision", "40"]);
    assert_eq!(v["input"]["precision_rule"], "explicit");
    assert_eq!(v["input"]["precision"], 40);
    let out = run(&["analyze", path, "--precision", "20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("98"));
}

#[test]
fn explicit_precision_can_run_out() {
    // the declared sum scans to lcm(2, 3) = 6 > q_max, needing more digits
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "sum.json",
        r#"{"p": 2, "m": 1, "rank": 5, "summands": [2, 3],
            "matrix": [[0, 2, 0, 0, 0], [1, 0, 0, 0, 0], [0, 0, 0, 0, 4], [0, 0, 1, 0, 0], [0, 0, 0, 2, 0]]}"#,
    );
    let path = spec.to_str().unwrap();
    let out = run(&["analyze", path, "--q-max", "3", "--precision", "8"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("need at least"));
    let v = analyze_json(&spec, &["--q-max", "3"]);
    assert_eq!(v["input"]["precision_rule"], "auto");
    assert!(v["input"]["precision"].as_u64().unwrap() > v["input"]["auto_precision"].as_u64().unwrap());
    assert_eq!(v["n"]["status"], "Equal");
    assert_eq!(v["input"]["summands"], serde_json::json!([2, 3]));
}

#[test]
fn bound_examples() {
    let out = run(&["bound", "--hodge", "0,1,5", "--lambda", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("theorem12      7"));
    let out = run(&["bound", "--c", "3", "--d", "3"]);
    assert!(stdout(&out).contains("pdiv           3"));
    let out = run(&["bound", "--hodge", "0,0,3,3", "--lambda", "3/2"]);
    assert!(stdout(&out).contains("theorem12      6"));
    let out = run(&["bound", "--hodge", "0,0,1"]);
    assert!(stdout(&out).contains("pdiv           1"), "{}", stdout(&out));
    assert_eq!(run(&["bound", "--hodge", "0,1", "--lambda", "3"]).status.code(), Some(1));
    assert_eq!(run(&["bound", "--hodge", "0,1", "--c", "1", "--d", "1"]).status.code(), Some(1));
    assert_eq!(run(&["bound"]).status.code(), Some(1));
}

#[test]
fn make_family_round_trips() {
    let dir = TempDir::new().unwrap();
    let cyclic = make_family(dir.path(), "cyc.json", &["cyclic", "--e", "0,3"]);
    assert_eq!(analyze_json(&cyclic, &[])["n"]["value"], 3);

    let k3 = make_family(dir.path(), "k3n.json", &["k3-nonisoclinic", "--r1", "1", "--mid", "1", "--r2", "1"]);
    let spec: Value = serde_json::from_str(&std::fs::read_to_string(&k3).unwrap()).unwrap();
    assert_eq!(spec["summands"], serde_json::json!([2, 1, 2]));
    assert_eq!(analyze_json(&k3, &[])["n"]["value"], 1);

    let ss = make_family(dir.path(), "ss.json", &["supersingular", "--d", "2", "--e", "1"]);
    assert_eq!(analyze_json(&ss, &[])["n"]["value"], 2);

    let r2 = make_family(dir.path(), "r2.json", &["rank2", "--l1", "1", "--l2", "3", "--seed", "9"]);
    let v = analyze_json(&r2, &[]);
    assert_eq!(v["input"]["seed"], 9);
    assert_eq!(v["n"]["upper_bound"], 2);

    let perm = make_family(dir.path(), "perm.json", &["permutational", "--pi", "2,1,3", "--e", "0,1,2", "--p", "3"]);
    let v = analyze_json(&perm, &[]);
    assert_eq!(v["bounds"]["permutational"], 2);

    assert_eq!(run(&["make-family", "k3-isoclinic", "--r", "2"]).status.code(), Some(1));
    assert_eq!(run(&["make-family", "cyclic"]).status.code(), Some(1));
    assert_eq!(run(&["make-family", "rank2", "--l1", "0", "--l2", "2"]).status.code(), Some(1));
}

#[test]
fn smith_command() {
    let out = run(&["smith", "--matrix", "1,0,0;0,5,0;0,0,125", "--p", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "0,1,3\n");
    let dir = TempDir::new().unwrap();
    let k3 = make_family(dir.path(), "k3.json", &["k3-isoclinic", "--r", "3"]);
    let out = run(&["smith", k3.to_str().unwrap()]);
    assert_eq!(stdout(&out), "0,1,2\n");
    let out = run(&["smith", "--matrix", "1,2;2,4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["smith", "--matrix", "1,2;x,4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"p": 4, "m": 1, "rank": 1, "matrix": [[1]]}"#);
    assert_eq!(run(&["analyze", bad.to_str().unwrap()]).status.code(), Some(1));
    let junk = write(dir.path(), "junk.json", "not json");
    assert_eq!(run(&["analyze", junk.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "/nonexistent/spec.json"]).status.code(), Some(1));
    assert_eq!(run(&["verify-paper", "--subset", "nope"]).status.code(), Some(1));
}

#[test]
fn verify_subsets() {
    for subset in ["k3", "rank2"] {
        let out = run(&["verify-paper", "--subset", subset]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        let text = stdout(&out);
        assert!(text.lines().filter(|l| l.starts_with("[PASS]")).count() >= 1);
        assert!(!text.contains("[FAIL]"));
    }
}

#[test]
fn output_is_byte_stable_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let spec = make_family(dir.path(), "k3n.json", &["k3-nonisoclinic", "--r1", "2", "--mid", "1", "--r2", "1"]);
    let outputs: Vec<Vec<u8>> = ["1", "2", "4", "1"]
        .iter()
        .map(|t| {
            let out = bin().env("FCRYSTAL_THREADS", t).args(["analyze", spec.to_str().unwrap()]).output().unwrap();
            assert_eq!(out.status.code(), Some(0));
            out.stdout
        })
        .collect();
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let out = bin().env("FCRYSTAL_THREADS", "zero").args(["bound", "--c", "1", "--d", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
