use serde_json::Value;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_elliptika"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("ELLIPTIKA_THREADS").output().expect("spawn elliptika")
}

fn json_out(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("json artifact")
}

fn error_of(o: &Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stderr).expect("json error on stderr");
    v["error"].clone()
}

#[test]
fn klsum_both_methods_agree() {
    let v = json_out(&run(&["klsum", "--l", "5", "--f", "1", "--xi", "1", "--n", "1", "--method", "both"]));
    let r = &v["result"];
    assert!(r["diff"].as_f64().unwrap() < 1e-9);
    assert!(r["factor"].is_array() && r["brute"].is_array());
    assert_eq!(v["config"]["command"], "klsum");
    assert_eq!(v["config"]["params"]["method"], "both");
}

#[test]
fn specfn_f_at_one() {
    let v = json_out(&run(&["specfn", "--fn", "F", "--x", "1"]));
    let got = v["result"]["values"][0]["value"].as_f64().unwrap();
    assert!((got - 0.5).abs() < 1e-12);
}

#[test]
fn csv_has_schema_and_config_header() {
    let o = run(&["--format", "csv", "specfn", "--fn", "H0", "--x", "0.5,1,2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# elliptika-schema v1");
    assert!(lines[1].starts_with("# config: {"));
    let cfg: Value = serde_json::from_str(lines[1].trim_start_matches("# config: ")).unwrap();
    assert_eq!(cfg["params"]["fn"], "H0");
    assert_eq!(lines[2], "x,value");
    assert_eq!(lines.len(), 6);
}

#[test]
fn replay_reproduces_result() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let o = run(&[
        "--output",
        first.to_str().unwrap(),
        "fourier",
        "--c",
        "0.05",
        "--d",
        "-12.5",
        "--region",
        "outside",
        "--phi",
        "H0",
        "--a",
        "0",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let o = run(&["--replay", first.to_str().unwrap()]);
    let text = std::fs::read_to_string(&first).unwrap();
    // the replayed config carries the same output path, so the file is rewritten
    assert!(o.status.success());
    let b: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(a, b);
    assert_eq!(a["config"]["params"]["tol"], 1e-10);
}

#[test]
fn replay_to_stdout_matches() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["klsum", "--l", "9", "--f", "2", "--xi", "-3", "--n", "-7"]);
    let a = json_out(&o);
    let path = dir.path().join("k.json");
    std::fs::write(&path, &o.stdout).unwrap();
    let b = json_out(&run(&["--replay", path.to_str().unwrap()]));
    assert_eq!(a, b);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let cfg = r#"{"config":{"command":"specfn","params":{"fn":"F","x":[1.0],"colour":"red"},"output_path":null,"format":"json"}}"#;
    std::fs::write(&path, cfg).unwrap();
    let o = run(&["--replay", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_of(&o);
    assert_eq!(e["kind"], "config");
    assert!(e["message"].as_str().unwrap().contains("colour"));
}

#[test]
fn unknown_top_level_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let cfg = r#"{"command":"specfn","params":{"fn":"F","x":[1.0]},"output_path":null,"format":"json","seed":3}"#;
    std::fs::write(&path, cfg).unwrap();
    assert_eq!(run(&["--replay", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn composite_p_exits_with_config_code() {
    let o = run(&["sigma", "--p", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_of(&o);
    assert_eq!(e["exit_code"], 2);
    assert_eq!(e["kind"], "config");
}

#[test]
fn bad_flags_exit_with_config_code() {
    let o = run(&["klsum", "--l", "0", "--f", "1", "--xi", "1", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["specfn", "--fn", "G", "--x", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_of(&o)["kind"], "config");
    let o = run(&["scan", "--primes", "2000..100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn klgrid_small_box_passes() {
    let v = json_out(&run(&["klgrid", "--l-max", "4", "--f-max", "3", "--xi-max", "3", "--n-max", "4"]));
    assert_eq!(v["result"]["passed"], true);
    assert_eq!(v["result"]["cases"], 4 * 3 * 7 * 8);
}

#[test]
fn expansion_check_reports_slope() {
    let v = json_out(&run(&["expansion-check", "--a", "1", "--m", "0", "--c2d", "1"]));
    let r = &v["result"];
    let slope = r["slope"].as_f64().unwrap();
    assert!((slope - r["expected"].as_f64().unwrap()).abs() < 0.4, "{slope}");
}

#[test]
fn sigma_output_independent_of_threads() {
    let strip = |mut v: Value| {
        v["result"]["runtime"] = Value::Null;
        v
    };
    let one = run(&["--threads", "1", "sigma", "--p", "101"]);
    let two = bin().args(["sigma", "--p", "101"]).env("ELLIPTIKA_THREADS", "2").output().unwrap();
    let (a, b) = (strip(json_out(&one)), strip(json_out(&two)));
    assert_eq!(a, b);
    assert!(a["result"]["truncation_audit"]["passed"].as_bool().unwrap());
}

#[test]
fn failing_audit_exits_four_unless_dirty() {
    // a deliberately tiny lattice cannot pass the doubling audit
    let args = ["sigma", "--p", "101", "--lambda", "1", "--phi", "1", "--chi0", "1", "--chi", "1"];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_of(&o)["kind"], "audit");
    let mut dirty = vec!["--allow-dirty"];
    dirty.extend_from_slice(&args);
    assert_eq!(run(&dirty).status.code(), Some(0));
}
