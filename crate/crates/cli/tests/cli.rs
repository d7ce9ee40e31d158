use std::path::PathBuf;
use std::process::{Command, Output};

fn gcdsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcdsum"))
        .args(args)
        .env_remove("GCDSUM_REGRESSION_FILE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn exact_both_methods() {
    let o = gcdsum(&["exact", "--x", "2", "--r", "2", "--f", "id", "--method", "both"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "17/8, 17/8, EQUAL");
    let o = gcdsum(&["exact", "--x", "1", "--r", "1", "--f", "id"]);
    assert_eq!(stdout(&o).trim(), "1");
    let o = gcdsum(&["exact", "--x", "5/2", "--r", "1", "--f", "psi", "--method", "both"]);
    let text = stdout(&o);
    let parts: Vec<&str> = text.trim().split(", ").collect();
    assert_eq!(parts.len(), 3);
    assert_eq!(parts[0], parts[1]);
    assert_eq!(parts[2], "EQUAL");
}

#[test]
fn exact_json() {
    let o = gcdsum(&["exact", "--x", "7/2", "--r", "3", "--f", "phi", "--method", "both", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "EQUAL");
    assert_eq!(v["naive"], v["identity"]);
}

#[test]
fn exit_codes() {
    assert_eq!(gcdsum(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gcdsum(&["exact", "--r", "1"]).status.code(), Some(1));
    assert_eq!(gcdsum(&["exact", "--x", "0", "--r", "1"]).status.code(), Some(2));
    assert_eq!(gcdsum(&["exact", "--x", "2", "--r", "1", "--f", "sigma"]).status.code(), Some(2));
    assert_eq!(gcdsum(&["exact", "--x", "2", "--r", "1", "--precision", "5"]).status.code(), Some(2));
    assert_eq!(gcdsum(&["exact", "--x", "10", "--r", "1", "--limit", "5"]).status.code(), Some(2));
    assert_eq!(gcdsum(&["--help"]).status.code(), Some(0));
}

#[test]
fn lemma_identity_is_exact() {
    let o = gcdsum(&["lemmas", "--which", "22", "--x", "1000"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().last().unwrap(), "EXACT-EQUAL");
    for which in ["23", "23q"] {
        let o = gcdsum(&["lemmas", "--which", which, "--x", "301/2"]);
        assert_eq!(stdout(&o).lines().last().unwrap(), "EXACT-EQUAL", "{which}");
    }
}

#[test]
fn asymptotic_lemma_reports() {
    for which in ["20", "201", "21", "211", "211s"] {
        let o = gcdsum(&["lemmas", "--which", which, "--x", "2000", "--format", "json"]);
        assert!(o.status.success(), "{which}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(!v.as_array().unwrap().is_empty());
        assert_eq!(v[0]["digits"], 50);
    }
}

#[test]
fn scan_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &PathBuf, threads: &str| {
        vec![
            "scan".to_string(),
            "--f".into(),
            "phi".into(),
            "--r".into(),
            "2".into(),
            "--xmin".into(),
            "100".into(),
            "--xmax".into(),
            "5000".into(),
            "--points".into(),
            "3".into(),
            "--half-integers".into(),
            "--threads".into(),
            threads.into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let run = |v: Vec<String>| gcdsum(&v.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(run(args(&a, "1")).status.success());
    assert!(run(args(&b, "2")).status.success());
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta.lines().count(), 4);
    assert!(ta.starts_with("x,r,f,exact,main,residual,theorem_side,gap,"));
    assert!(run(args(&a, "1")).status.success());
    assert_eq!(ta, std::fs::read_to_string(&a).unwrap());
}

#[test]
fn scan_json_and_bad_output() {
    let o = gcdsum(&["scan", "--xmin", "10", "--xmax", "50", "--points", "3", "--half-integers", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[0]["x"], "21/2");
    let o = gcdsum(&["scan", "--xmin", "10", "--xmax", "50", "--points", "3", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_regression_key() {
    // grid 10^3..10^5, half-integers, r = 1, f = id against the committed file
    let o = gcdsum(&[
        "scan",
        "--f",
        "id",
        "--r",
        "1",
        "--xmin",
        "1000",
        "--xmax",
        "100000",
        "--points",
        "21",
        "--half-integers",
        "--regression-key",
        "scan.id.r1.x1e3_1e5.max_gap_over_log",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 22);

    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path().join("reg.txt");
    std::fs::write(&reg, "tight = 1e-9\n").unwrap();
    let o = gcdsum(&[
        "scan",
        "--xmin",
        "100",
        "--xmax",
        "1000",
        "--points",
        "3",
        "--half-integers",
        "--regression-key",
        "tight",
        "--regression-file",
        reg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn zeros_against_residual() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("first100.txt");
    let text = std::fs::read_to_string(data("zeros_2100.txt")).unwrap();
    let first: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).take(100).collect();
    std::fs::write(&file, first.join("\n")).unwrap();
    let o = gcdsum(&["zeros", "--file", file.to_str().unwrap(), "--x", "100.5", "--r", "1", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let row = &v[0];
    assert_eq!(row["zeros"], "100");
    let diff: f64 = row["difference_with_offset"].as_str().unwrap().parse().unwrap();
    assert!(diff.abs() < 0.01);
    let o = gcdsum(&["zeros", "--file", file.to_str().unwrap(), "--x", "100", "--r", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn jsum_on_empty_and_real_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "# no zeros\n").unwrap();
    let o = gcdsum(&["jsum", "--file", empty.to_str().unwrap(), "--lambda", "0.5", "--tgrid", "100:200:3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').nth(3) == Some("0")));

    let o = gcdsum(&["jsum", "--file", data("zeros_10_zprime.txt").to_str().unwrap(), "--lambda", "0", "--tgrid", "15,40,49"]);
    let text = stdout(&o);
    let counts: Vec<&str> = text.lines().skip(1).map(|r| r.split(',').nth(2).unwrap()).collect();
    assert_eq!(counts, ["1", "6", "9"]);
    let o = gcdsum(&["jsum", "--file", data("zeros_10_zprime.txt").to_str().unwrap(), "--tgrid", "100"]);
    assert_eq!(o.status.code(), Some(2));
}
