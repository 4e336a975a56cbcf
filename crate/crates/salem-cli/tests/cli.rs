use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn salem(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_salem")).args(args).current_dir(dir).output().expect("salem runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn cantor_level_three_has_eight_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let o = salem(dir.path(), &["construct", "cantor", "--k", "3", "--out", "c.json"]);
    assert_eq!(code(&o), 0);
    let v = read_json(&dir.path().join("c.json"));
    assert_eq!(v["intervals"].as_array().unwrap().len(), 8);
    let m = read_json(&dir.path().join("c.json.manifest.json"));
    assert_eq!(m["command"], "construct cantor");
    assert_eq!(m["exit_code"], 0);
    assert!(m["output_digests"].as_object().unwrap().contains_key("c.json"));
}

#[test]
fn s_level_writes_schedule_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = salem(dir.path(), &["construct", "s_level", "--alpha", "1", "--k", "1", "--mode", "demo", "--out", "s.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("s.json.schedules.json").exists());
    assert!(read_json(&dir.path().join("s.json"))["intervals"].is_array());
}

#[test]
fn certified_s_level_nine_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let o = salem(dir.path(), &["construct", "s_level", "--alpha", "1", "--k", "9", "--mode", "certified"]);
    assert_eq!(code(&o), 3);
    assert!(!o.stderr.is_empty());
}

#[test]
fn invalid_parameters_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&salem(dir.path(), &["construct", "g", "--q", "3/2", "--x", "1", "--k", "1"])), 2);
    assert_eq!(code(&salem(dir.path(), &["construct", "s_level", "--alpha", "-1", "--k", "1"])), 2);
    assert_eq!(code(&salem(dir.path(), &["codec", "encode", "--bits", "102"])), 2);
}

#[test]
fn window_and_decay_pass() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&salem(dir.path(), &["verify", "window", "--M", "10", "--zeta", "1/100"])), 0);
    let o = salem(dir.path(), &["verify", "decay", "--M", "10", "--N", "1", "--band", "1000", "--out", "d.csv"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert!(csv.starts_with("lemma,checked_band,max_violation,pass\n"));
}

#[test]
fn mutated_schedule_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = salem(
        dir.path(),
        &["verify", "effective_g", "--alpha", "1", "--relaxed-c", "1", "--out", "g.json"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut input = read_json(&dir.path().join("g.json.input.json"));
    let ms = input["schedule"]["ms"].as_array_mut().unwrap();
    assert!(ms.len() >= 2);
    let m0: u64 = ms[0].as_str().unwrap().parse().unwrap();
    ms[1] = Value::String((m0 + 1).to_string());
    std::fs::write(dir.path().join("bad.json"), serde_json::to_vec(&input).unwrap()).unwrap();
    let o = salem(dir.path(), &["verify", "effective_g", "--relaxed-c", "1", "--input", "bad.json", "--out", "bad.out.json"]);
    assert_eq!(code(&o), 1);
    assert_eq!(read_json(&dir.path().join("bad.out.json"))["pass"], false);
}

#[test]
fn mutated_trace_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = salem(dir.path(), &["construct", "g", "--q", "1/2", "--x", "111", "--k", "3", "--trace", "--out", "t.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&salem(dir.path(), &["verify", "cover_sum", "--input", "t.json"])), 0);
    let mut trace = read_json(&dir.path().join("t.json"));
    let stage = trace["stages"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|s| s.get("widths").is_some())
        .expect("a shrink stage");
    let w = &mut stage["widths"][0]["width"];
    let (p, q) = w.as_str().unwrap().split_once('/').unwrap_or((w.as_str().unwrap(), "1"));
    let doubled = format!("{}/{q}", 2 * p.parse::<u64>().unwrap());
    *w = Value::String(doubled);
    std::fs::write(dir.path().join("bad.json"), serde_json::to_vec(&trace).unwrap()).unwrap();
    assert_eq!(code(&salem(dir.path(), &["verify", "cover_sum", "--input", "bad.json"])), 1);
}

#[test]
fn tree_code_mutation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = salem(dir.path(), &["verify", "tree_code", "--depth", "3", "--seed", "4", "--out", "ok.json"]);
    assert_eq!(code(&o), 0);
    let code_json = r#"{"depth":1,"pi":{"":"1","0":"1/2","1":"1/4"}}"#;
    std::fs::write(dir.path().join("bad.json"), code_json).unwrap();
    assert_eq!(code(&salem(dir.path(), &["verify", "tree_code", "--input", "bad.json"])), 1);
}

#[test]
fn estimates() {
    let dir = tempfile::tempdir().unwrap();
    let o = salem(dir.path(), &["estimate", "box", "--cantor", "10"]);
    assert_eq!(code(&o), 0);
    let fit: Value = serde_json::from_slice(&o.stdout).unwrap();
    let slope = fit["slope"].as_f64().unwrap();
    assert!((slope - 2f64.ln() / 3f64.ln()).abs() < 0.05);
    assert!(fit["banner"].as_str().unwrap().contains("diagnostic"));

    let o = salem(dir.path(), &["estimate", "box", "--full", "8"]);
    let fit: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((fit["slope"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    std::fs::write(dir.path().join("broken.json"), "[{\"j\": 1, ").unwrap();
    assert_eq!(code(&salem(dir.path(), &["estimate", "box", "--input", "broken.json"])), 2);
}

#[test]
fn codec_round_trip_and_guard_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = salem(dir.path(), &["codec", "encode", "--bits", "101", "--d", "1"]);
    assert_eq!(code(&o), 0);
    let value = String::from_utf8(o.stdout).unwrap().trim().to_string();
    let o = salem(dir.path(), &["codec", "decode", "--value", &value, "--d", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), "101");
    let o = salem(dir.path(), &["codec", "decode", "--value", "1/4", "--d", "1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("guard"));
}

fn cover(dir: &Path, balls: &str) -> (i32, Value) {
    std::fs::write(dir.join("balls.json"), balls).unwrap();
    let o = salem(dir, &["cover-check", "balls.json"]);
    let v = serde_json::from_slice(&o.stdout).unwrap_or(Value::Null);
    (code(&o), v)
}

#[test]
fn cover_check_examples() {
    let dir = tempfile::tempdir().unwrap();
    let (c, _) = cover(dir.path(), r#"[{"center":["1/3"],"radius":"2"}]"#);
    assert_eq!(c, 0);
    let (c, _) = cover(dir.path(), r#"[{"center":["0","1/2","1"],"radius":"3/4"},{"center":[],"radius":"1/2"}]"#);
    assert_eq!(c, 0);
    let (c, v) = cover(dir.path(), r#"[{"center":["0","1/2","1"],"radius":"3/4"},{"center":["1/4"],"radius":"1"}]"#);
    assert_eq!(c, 1);
    assert!(v.to_string().contains("witness"));
    let (c, _) = cover(dir.path(), r#"[{"center":["0"],"radius":"-1"}]"#);
    assert_eq!(c, 2);
    let (c, _) = cover(dir.path(), "not json");
    assert_eq!(c, 2);
}
