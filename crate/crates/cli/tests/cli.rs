use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_adverbs"))
        .args(args)
        .current_dir(data_dir())
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let (code, out, err) = run(&all);
    let v: Value = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}"));
    (code, v)
}

fn status_of<'a>(report: &'a Value, name: &str) -> &'a str {
    report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["name"] == name)
        .unwrap_or_else(|| panic!("no verdict {name}"))["status"]
        .as_str()
        .unwrap()
}

fn stat<'a>(report: &'a Value, name: &str) -> &'a str {
    report["stats"]
        .as_array()
        .unwrap()
        .iter()
        .find(|kv| kv[0] == name)
        .unwrap_or_else(|| panic!("no stat {name}"))[1]
        .as_str()
        .unwrap()
}

#[test]
fn circuit_check_and_true() {
    let (code, r) = json(&["circuit", "check", "and_true.bool", "--samples", "200"]);
    assert_eq!(status_of(&r, "2/statically"), "PROVED");
    assert_eq!(status_of(&r, "1/statically"), "UNKNOWN");
    assert_eq!(status_of(&r, "1/oracle"), "REFUTED");
    assert_eq!(status_of(&r, "3/statically"), "UNKNOWN");
    assert_eq!(status_of(&r, "3/statically-in-parallel"), "PROVED");
    // property (1) is never provable, so the command as a whole fails
    assert_eq!(code, 1);
    for v in r["verdicts"].as_array().unwrap() {
        if v["status"] == "REFUTED" {
            assert!(v["witness"].is_string(), "{v}");
        }
    }
}

#[test]
fn circuit_stats() {
    let (code, r) = json(&["circuit", "stats", "and_true.bool"]);
    assert_eq!(code, 0);
    assert_eq!(stat(&r, "app_depth"), "1");
    assert_eq!(stat(&r, "app_num_var"), "1");
}

#[test]
fn commutativity_needs_parallel() {
    let (code, r) = json(&["equiv", "check", "--theory", "statically-in-parallel", "and_tu.term", "and_ut.term"]);
    assert_eq!((code, status_of(&r, "and_tu.term ≅ and_ut.term")), (0, "PROVED"));
    let (code, r) = json(&["equiv", "check", "--theory", "statically", "and_tu.term", "and_ut.term"]);
    assert_eq!((code, status_of(&r, "and_tu.term ≅ and_ut.term")), (1, "REFUTED"));
}

#[test]
fn refinement_of_repetition() {
    let (code, _) = json(&["refine", "check", "--theory", "repeatedly", "flip_twice.term", "flips.term"]);
    assert_eq!(code, 0);
    let (code, r) = json(&["refine", "check", "--theory", "repeatedly", "flips.term", "flip_twice.term"]);
    assert_eq!(code, 1);
    assert!(r["verdicts"][0]["witness"].as_str().unwrap().starts_with("only lhs"));
}

#[test]
fn haxl_rounds_from_temp_files() {
    let dir = TempDir::new().unwrap();
    let db = dir.path().join("db");
    std::fs::write(&db, "(x 3) (y 5)").unwrap();
    let cases = [
        ("(keys x y)\n(bind (effect DataEff GetData x) (k (_ (effect DataEff GetData y))))", "2"),
        ("(keys x y)\n(liftA2 pair[nat8,nat8] (effect DataEff GetData x) (effect DataEff GetData y))", "1"),
        ("(keys x y)\n(pure 0)", "0"),
    ];
    for (i, (program, rounds)) in cases.iter().enumerate() {
        let p = dir.path().join(format!("p{i}.fetch"));
        std::fs::write(&p, program).unwrap();
        let (code, r) = json(&["haxl", "analyze", p.to_str().unwrap(), "--db", db.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert_eq!(stat(&r, "rounds"), *rounds, "{program}");
    }
}

#[test]
fn server_verify_one_connection() {
    let (code, r) = json(&["server", "verify", "--conns", "1"]);
    assert_eq!(code, 0);
    let verdicts = r["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 4);
    assert!(verdicts.iter().all(|v| v["status"] == "PROVED" && v["bounds"] == serde_json::json!([2, 4])));
    let (code, r) = json(&["server", "verify", "--conns", "1", "--reverse"]);
    assert_eq!(code, 1);
    assert_eq!(status_of(&r, "Spec ⊑ Impl"), "REFUTED");
}

#[test]
fn server_trace_lists_behaviors() {
    let (code, out, _) = run(&["server", "trace", "impl.net", "--conns", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("NetworkEff.accept()=1; NetworkEff.read(1)=0"), "{out}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["circuit", "check", "missing.bool"]).0, 2);
    assert_eq!(run(&["equiv", "check", "--theory", "nope", "and_tu.term", "and_ut.term"]).0, 2);
    assert_eq!(run(&["server", "verify", "--bound-l", "3", "--bound-r", "2"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.bool");
    std::fs::write(&bad, "x & (y").unwrap();
    let (code, _, err) = run(&["circuit", "stats", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.bool"), "{err}");
}

#[test]
fn output_is_deterministic_apart_from_timing() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timing");
        v
    };
    let args = ["circuit", "check", "and_true.bool", "--samples", "100", "--seed", "9"];
    assert_eq!(strip(json(&args).1), strip(json(&args).1));
}
