use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SYS_A: &str = r#"{
  "factors_G": ["cyclic 2", "cyclic 2"],
  "factors_B": ["cyclic 2", "trivial"],
  "theta": [[0, 1], [0, 0]],
  "subgroup": ["0:1", "1:1 0:1 1:1"]
}"#;

const SYS_B: &str = r#"{
  "factors_G": ["cyclic 2", "cyclic 3"],
  "subgroup": ["0:1", "1:1 0:1 1:2", "1:2 0:1 1:1"]
}"#;

fn higgins(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_higgins")).args(args).output().expect("binary runs")
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn decompose_sys_a() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "a.json", SYS_A);
    let cert = dir.path().join("cert.json");
    let o = higgins(&["decompose", s(&input), "-o", s(&cert)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).ends_with("verdict: pass\n"));
    let text = fs::read_to_string(&cert).unwrap();
    assert!(text.ends_with('\n'));
    let v = json(&text);
    assert_eq!(v["factors"][0]["reps"], json(r#"["", "1:1"]"#));
    assert_eq!(v["factors"][0]["vertex_groups"], json(r#"[["", "0:1"], ["", "1:1 0:1 1:1"]]"#));
    assert_eq!(v["factors"][0]["F_basis"], json("[]"));
    assert_eq!(v["factors"][1]["H_lambda_gens"], json("[]"));
}

#[test]
fn decompose_to_stdout_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "a.json", SYS_A);
    let first = higgins(&["decompose", s(&input)]);
    let second = higgins(&["decompose", s(&input)]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    json(&stdout(&first));
}

#[test]
fn decompose_index_bound() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "a.json", SYS_A);
    let o = higgins(&["decompose", s(&input), "--max-cosets", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("IndexBoundExceeded"));
}

#[test]
fn decompose_rejects_non_surjective_theta() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "bad.json", r#"{"factors_G": ["cyclic 2"], "factors_B": ["cyclic 2"], "theta": [[0, 0]]}"#);
    assert_eq!(higgins(&["decompose", s(&input)]).status.code(), Some(3));
}

#[test]
fn decompose_rejects_image_not_onto() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "h.json", r#"{"factors_G": ["cyclic 2", "cyclic 2"], "subgroup": ["0:1", "1:1 0:1 1:1"]}"#);
    let o = higgins(&["decompose", s(&input)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("proper subgroup"));
}

#[test]
fn invalid_json_and_missing_file() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "x.json", "{ not json");
    assert_eq!(higgins(&["kurosh", s(&input)]).status.code(), Some(3));
    assert_eq!(higgins(&["kurosh", "/nonexistent/file.json"]).status.code(), Some(3));
}

#[test]
fn kurosh_sys_b() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "b.json", SYS_B);
    let o = higgins(&["kurosh", s(&input)]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&stdout(&o));
    let pieces = v["pieces"].as_array().unwrap();
    assert_eq!(pieces.len(), 3);
    assert!(pieces.iter().all(|p| p["lambda"] == 0 && p["stabilizer"].as_array().unwrap().len() == 2));
    assert_eq!(pieces[0]["rep"], "");
    assert_eq!(v["free_rank"], 0);
}

#[test]
fn kurosh_whole_group() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "g.json", r#"{"factors_G": ["cyclic 2", "cyclic 3"], "subgroup": ["0:1", "1:1"]}"#);
    let v = json(&stdout(&higgins(&["kurosh", s(&input)])));
    assert_eq!(v["index"], 1);
    assert!(v["pieces"].as_array().unwrap().iter().all(|p| p["rep"] == ""));
}

#[test]
fn kurosh_trivial_subgroup_exceeds_bound() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "t.json", r#"{"factors_G": ["cyclic 2", "cyclic 2"], "subgroup": []}"#);
    assert_eq!(higgins(&["kurosh", s(&input)]).status.code(), Some(2));
}

#[test]
fn normalform_examples() {
    let dir = TempDir::new().unwrap();
    let z2z2 = file(&dir, "z2z2.json", r#"{"factors_G": ["cyclic 2", "cyclic 2"]}"#);
    let z2z3 = file(&dir, "z2z3.json", r#"{"factors_G": ["cyclic 2", "cyclic 3"]}"#);
    assert_eq!(stdout(&higgins(&["normalform", s(&z2z2), "0:1 0:1"])), "\n");
    assert_eq!(stdout(&higgins(&["normalform", s(&z2z3), "0:1 1:1 1:2"])), "0:1\n");
    assert_eq!(stdout(&higgins(&["normalform", s(&z2z3), ""])), "\n");
    assert_eq!(higgins(&["normalform", s(&z2z3), "0:5"]).status.code(), Some(3));
}

#[test]
fn member_examples() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "a.json", SYS_A);
    assert_eq!(stdout(&higgins(&["member", s(&input), "1:1 0:1 1:1"])), "true\n");
    assert_eq!(stdout(&higgins(&["member", s(&input), "1:1"])), "false\n");
    assert_eq!(stdout(&higgins(&["member", s(&input), ""])), "true\n");
}

#[test]
fn verify_round_trip_and_tampering() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "a.json", SYS_A);
    let cert = dir.path().join("cert.json");
    assert_eq!(higgins(&["decompose", s(&input), "-o", s(&cert)]).status.code(), Some(0));

    let o = higgins(&["verify", s(&input), s(&cert), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let report = json(&stdout(&o));
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["checks"].as_array().unwrap().len(), 7);

    // x = b·a is not Θ-trivial
    let mut v = json(&fs::read_to_string(&cert).unwrap());
    v["factors"][0]["reps"][1] = "1:1 0:1".into();
    let bad = file(&dir, "bad.json", &serde_json::to_string(&v).unwrap());
    let o = higgins(&["verify", s(&input), s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).ends_with("verdict: fail\n"));

    let o = higgins(&["verify", s(&input), s(&input)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn graph_and_dot() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "a.json", SYS_A);
    let o = higgins(&["graph", s(&input)]);
    let text = stdout(&o);
    assert!(text.starts_with("digraph core {") && text.ends_with("}\n"));
    assert!(text.contains("0 -> 1 [label=\"1:1\"];"));

    let dot = dir.path().join("h.dot");
    let cert = dir.path().join("c.json");
    assert_eq!(higgins(&["decompose", s(&input), "-o", s(&cert), "--dot", s(&dot)]).status.code(), Some(0));
    assert_eq!(fs::read_to_string(&dot).unwrap(), text);

    let trivial = file(&dir, "t.json", r#"{"factors_G": ["cyclic 2", "cyclic 2"]}"#);
    let o = higgins(&["graph", s(&trivial), "--core"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(higgins(&["graph", s(&trivial)]).status.code(), Some(2));
}
