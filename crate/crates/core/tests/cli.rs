use std::process::Command;

fn infoflow(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_infoflow")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn write_spec(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn butterfly_second_view_has_one_path_to_a4() {
    let (code, out) = infoflow(&["paths", "--fixture", "butterfly", "--message", "M2", "--target", "A4"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["paths"].as_array().unwrap().len(), 1);
}

#[test]
fn fft_alias_target_has_paths() {
    let (code, out) = infoflow(&["paths", "--fixture", "fft-even", "--target", "Y2-output", "--out", "text"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.starts_with("0 path"), "{out}");
}

#[test]
fn constant_system_has_no_path() {
    let dir = tempfile::tempdir().unwrap();
    let (_, spec) = infoflow(&["fixtures", "build", "ce1"]);
    let mut v: serde_json::Value = serde_json::from_str(&spec).unwrap();
    v["functions"] = serde_json::json!({});
    let path = write_spec(&dir, "const.json", &v.to_string());
    let (code, _) = infoflow(&["paths", "--spec", &path, "--target", "B3"]);
    assert_eq!(code, 5);
}

#[test]
fn empty_spec_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "empty.json", "{}");
    assert_eq!(infoflow(&["analyze", "--spec", &path]).0, 3);
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "bad.json", "{\"nodes\": [");
    assert_eq!(infoflow(&["analyze", "--spec", &path]).0, 2);
}

#[test]
fn narrow_search_cap_is_a_budget_error() {
    assert_eq!(infoflow(&["analyze", "--fixture", "ce2", "--max-candidates", "1"]).0, 4);
}

#[test]
fn hiding_every_node_is_invalid() {
    assert_eq!(infoflow(&["hidden", "--fixture", "ce1", "--hidden", "A,B,C"]).0, 3);
}

#[test]
fn sampled_reports_are_reproducible() {
    let args = ["analyze", "--fixture", "ce1", "--engine", "sampled", "--n", "2000", "--seed", "7"];
    let (c1, a) = infoflow(&args);
    let (c2, b) = infoflow(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}

#[test]
fn dot_marks_the_first_view_in_blue() {
    let (code, out) = infoflow(&["analyze", "--fixture", "butterfly", "--message", "M1", "--out", "dot"]);
    assert_eq!(code, 0);
    let blue: Vec<&str> = out.lines().filter(|l| l.contains(" -> ") && l.contains("color=blue")).collect();
    assert!(out.starts_with("digraph"));
    let (_, json) = infoflow(&["analyze", "--fixture", "butterfly", "--message", "M1"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let flowing = v["edges"].as_array().unwrap().iter().filter(|e| e["has_flow"] == true).count();
    assert_eq!(blue.len(), flowing);
}

#[test]
fn hidden_fixture_raises_alarm() {
    let (code, out) = infoflow(&["hidden", "--fixture", "hidden-basic", "--out", "text"]);
    assert_eq!(code, 0);
    assert!(out.contains("t=1 -> t=2: ALARM"), "{out}");
}

#[test]
fn simulate_writes_header() {
    let (code, out) = infoflow(&["simulate", "--fixture", "ce1", "--n", "5", "--seed", "1"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("M,A0->A1,"), "{out}");
    assert_eq!(out.lines().count(), 6);
}
