use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    json: Value,
}

fn nilcert(cache: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_nilcert"))
        .args(args)
        .env("NILCERT_CACHE_DIR", cache)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(out.stdout).expect("UTF-8 output");
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    Run { code: out.status.code().unwrap_or(-1), stdout, json }
}

fn zero_test(cache: &Path, p: &str, expr: &str) -> Run {
    nilcert(cache, &["zero-test", "--char", p, "--expr", expr])
}

fn certificate_file(r: &Run) -> PathBuf {
    PathBuf::from(r.json["result"]["certificate_file"].as_str().expect("certificate path"))
}

#[test]
fn zero_test_examples() {
    let dir = tempfile::tempdir().unwrap();
    let r = zero_test(dir.path(), "3", "x1^2 x2^2 x1 x2");
    assert_eq!(r.code, 0);
    assert_eq!(r.json["schema_version"], 1);
    assert_eq!(r.json["result"]["decision"], "nonzero");
    let r = zero_test(dir.path(), "5", "x1^2 x2^2 x1 x2");
    assert_eq!(r.code, 0);
    assert_eq!(r.json["result"]["decision"], "zero");
    let r = zero_test(dir.path(), "0", "x1^3");
    assert_eq!((r.code, r.json["result"]["decision"].as_str()), (0, Some("zero")));
}

#[test]
fn zero_test_errors_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let r = zero_test(dir.path(), "0", "x1 x2 + ");
    assert_eq!(r.code, 1);
    assert_eq!(r.json["error"]["position"], 8);
    let r = zero_test(dir.path(), "4", "x1");
    assert_eq!(r.code, 1);
    let r = nilcert(dir.path(), &["zero-test", "--char", "3", "--budget-cols", "100", "--expr", "x1^3 x2^3 x3^3"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.json["result"]["decision"], "undecided");
}

#[test]
fn zero_test_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("e.txt");
    std::fs::write(&f, "x1^2 x2 x1 x2\n").unwrap();
    let r = nilcert(dir.path(), &["zero-test", "--char", "2", "--file", f.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stdout);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let r = zero_test(dir.path(), "0", "x1^2 x2^2 x1");
    assert_eq!(r.json["result"]["decision"], "nonzero");
    let cert = certificate_file(&r);
    assert_eq!(nilcert(dir.path(), &["verify", cert.to_str().unwrap()]).code, 0);

    let out = dir.path().join("out.json");
    std::fs::write(&out, &r.stdout).unwrap();
    assert_eq!(nilcert(dir.path(), &["verify", out.to_str().unwrap()]).code, 0);

    let r = zero_test(dir.path(), "5", "x1^2 x2^2 x1 x2");
    let text = std::fs::read_to_string(certificate_file(&r)).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    let c = v["rows"][0]["coeff"].as_str().unwrap().parse::<i64>().unwrap();
    v["rows"][0]["coeff"] = Value::String(((c + 1) % 5).max(1).to_string());
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(nilcert(dir.path(), &["verify", tampered.to_str().unwrap()]).code, 3);

    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["system"]["char"] = Value::from(7);
    let wrong = dir.path().join("wrong-char.json");
    std::fs::write(&wrong, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(nilcert(dir.path(), &["verify", wrong.to_str().unwrap()]).code, 3);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": ").unwrap();
    assert_eq!(nilcert(dir.path(), &["verify", bad.to_str().unwrap()]).code, 1);
}

#[test]
fn warm_cache_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["zero-test", "--char", "3", "--expr", "x1^2 x2^2 x1 x2"],
        &["dim", "--char", "2", "--mdeg", "3,1,1,1"],
        &["nildeg", "--char", "2", "--letters", "3"],
        &["functional-check", "--functional", "square-count", "--char", "2", "--mdeg", "3,1,1"],
        &["amitsur", "--k", "3", "--expr", "x1 + x2 x1"],
        &["trace-decompose", "--char", "2", "--expr", "s2(x1 x2)"],
        &["report", "--theorem", "2", "--char", "5", "--letters-range", "1..3"],
    ];
    for args in runs {
        let cold = nilcert(dir.path(), args);
        let warm = nilcert(dir.path(), args);
        assert_eq!(cold.code, 0, "{args:?}: {}", cold.stdout);
        assert_eq!(cold.stdout, warm.stdout, "{args:?}");
        assert_eq!(cold.code, warm.code);
        let fresh = tempfile::tempdir().unwrap();
        let again = nilcert(fresh.path(), args);
        if args[0] != "zero-test" {
            assert_eq!(cold.stdout, again.stdout, "{args:?} in a fresh cache");
        }
    }
}

#[test]
fn decided_outputs_verify() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["nildeg", "--char", "3", "--letters", "2"],
        &["trace-decompose", "--char", "3", "--expr", "tr(x1^2 x2^2 x1 x2)"],
        &["trace-decompose", "--char", "5", "--expr", "tr(x1^2 x2^2 x1 x3)"],
        &["report", "--theorem", "1", "--char", "2", "--letters-range", "2..3"],
    ];
    for args in runs {
        let r = nilcert(dir.path(), args);
        assert_eq!(r.code, 0, "{args:?}");
        let f = dir.path().join("out.json");
        std::fs::write(&f, &r.stdout).unwrap();
        let v = nilcert(dir.path(), &["verify", f.to_str().unwrap()]);
        assert_eq!(v.code, 0, "{args:?}: {}", v.stdout);
    }
}

#[test]
fn json_flag_writes_the_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.json");
    let r = nilcert(dir.path(), &["dim", "--char", "0", "--mdeg", "3,2", "--json", out.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(out).unwrap(), r.stdout);
}

#[test]
fn nilpotency_reports() {
    let dir = tempfile::tempdir().unwrap();
    let r = nilcert(dir.path(), &["report", "--theorem", "1", "--char", "2", "--letters-range", "2..5"]);
    assert_eq!(r.code, 0);
    let values: Vec<u64> =
        r.json["result"]["cells"].as_array().unwrap().iter().map(|c| c["computed"]["value"].as_u64().unwrap()).collect();
    assert_eq!(values, vec![6, 6, 7, 8]);

    let r = nilcert(dir.path(), &["report", "--theorem", "1", "--char", "3", "--letters-range", "2..3"]);
    let cells = r.json["result"]["cells"].as_array().unwrap();
    assert_eq!(cells[0]["computed"]["value"], 7);
    let c3 = cells[1]["computed"]["value"].as_u64().unwrap();
    assert!(c3 == 9 || c3 == 10);
    assert_eq!(cells[1]["agreement"], "resolved");
}

#[test]
fn amitsur_matches_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let r = nilcert(dir.path(), &["amitsur", "--k", "3", "--expr", "x1 + x2 + x1 x2", "--seed", "7"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json["result"]["agrees"], true);
    assert_eq!(nilcert(dir.path(), &["amitsur", "--k", "2", "--expr", "x1 + "]).code, 1);
}
