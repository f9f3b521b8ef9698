use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn lumirend(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lumirend"))
        .args(args)
        .env_remove("LUMIREND_HORIZON")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn sim_run_meets_at_the_midpoint() {
    let o = lumirend(&[
        "run",
        "--alg",
        "ss3",
        "--schedule",
        "sim",
        "--init",
        "A,A",
        "--dist",
        "1",
        "--rigid",
        "--class",
        "ssync",
    ]);
    assert_eq!(code(&o), 0);
    let lines: Vec<serde_json::Value> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["distance"], "1/1");
    assert_eq!(lines.last().unwrap()["distance"], "0/1");
    assert_eq!(lines.last().unwrap()["positions"][0], "1/2");
}

#[test]
fn zero_distance_is_met_at_once() {
    let o = lumirend(&[
        "run",
        "--alg",
        "ss3",
        "--schedule",
        "alt",
        "--init",
        "A,A",
        "--dist",
        "0",
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("t=0"));
}

#[test]
fn diverging_run_writes_a_certificate_that_validates() {
    let cert = scratch("alg_a.json");
    let o = lumirend(&[
        "run",
        "--alg",
        "alg_a",
        "--schedule",
        "alt-swap",
        "--init",
        "B,C",
        "--rigid",
        "--class",
        "lc-atomic,move-atomic",
        "--cert",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let v = lumirend(&["verify", "--validate", cert.to_str().unwrap()]);
    assert_eq!(code(&v), 2);
    let j: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(j["ratio"], "1/4");
}

#[test]
fn tampered_certificate_is_refused() {
    let cert = scratch("tampered.json");
    let o = lumirend(&["replay", "lemma6_alg_a", "--out", cert.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let text = fs::read_to_string(&cert).unwrap().replace("\"1/4\"", "\"1/2\"");
    fs::write(&cert, text).unwrap();
    assert_eq!(code(&lumirend(&["verify", "--validate", cert.to_str().unwrap()])), 1);
}

#[test]
fn csv_trace_has_a_header() {
    let o = lumirend(&[
        "run",
        "--alg",
        "qss4",
        "--init",
        "A,B",
        "--nonrigid",
        "--delta",
        "1/4",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("t,ops_r,ops_s,lights_r,lights_s,positions_r,positions_s,distance\n"));
}

#[test]
fn replay_reports_bad_lambda() {
    let o = lumirend(&["replay", "lemma9_6", "--lambda", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("λ≠0"));
}

#[test]
fn replay_prints_the_certificate() {
    let o = lumirend(&["replay", "lemma9_3", "--lambda", "1/2"]);
    assert_eq!(code(&o), 2);
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["initial"]["colors"], serde_json::json!(["A", "B"]));
    assert!(j["block"].as_array().unwrap().len() >= 4);
}

#[test]
fn decimals_are_rejected() {
    let o = lumirend(&["run", "--alg", "ss3", "--dist", "0.5"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn illegal_schedule_file_is_refused() {
    let path = scratch("illegal.json");
    fs::write(
        &path,
        r#"{"prefix":[{"t":1,"ops":["LOOK","-"]},{"t":2,"ops":["-","LC"]},{"t":3,"ops":["COMP","-"]}]}"#,
    )
    .unwrap();
    let o = lumirend(&[
        "run",
        "--alg",
        "ss3",
        "--class",
        "lc-atomic",
        "--schedule",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("[1, 2]"));
}

#[test]
fn nonqss3_from_b_diverges() {
    let o = lumirend(&[
        "verify",
        "--alg",
        "nonqss3",
        "--class",
        "lc-atomic",
        "--rigid",
        "--init",
        "B,B",
        "--horizon",
        "40",
    ]);
    assert_eq!(code(&o), 2);
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["verdict"], "Diverges");
    assert_eq!(j["results"][0]["certificate"]["ratio"], "1/1");
}

#[test]
fn verify_classifies_without_inits() {
    let o = lumirend(&[
        "verify",
        "--alg",
        "nonqss3",
        "--class",
        "lc-atomic",
        "--rigid",
        "--horizon",
        "30",
    ]);
    assert_eq!(code(&o), 0);
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["classification"], "NonQuasiSelfStabilizing");
}

#[test]
fn config_file_and_environment_supply_flags() {
    let cfg = scratch("config.json");
    fs::write(
        &cfg,
        r#"{"alg": "qss4", "nonrigid": true, "delta": "1/4", "init": "A,B", "schedule": "sim"}"#,
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lumirend"))
        .args(["run", "--config", cfg.to_str().unwrap(), "--schedule", "alt"])
        .env("LUMIREND_HORIZON", "4")
        .output()
        .unwrap();
    assert_ne!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    // the explicit --schedule alt wins over the file's sim
    assert!(text.lines().nth(1).unwrap().contains(r#""ops":["LC","-"]"#));
}

#[test]
fn enumerate_one_color() {
    let o = lumirend(&[
        "enumerate",
        "--colors",
        "1",
        "--class",
        "ssync",
        "--rigid",
        "--horizon",
        "40",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",Diverges")));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inconclusive=0"));
}

#[test]
fn oversized_enumeration_needs_force() {
    let o = lumirend(&["enumerate", "--colors", "4"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--force"));
}

#[test]
fn output_is_reproducible() {
    let args = [
        "enumerate",
        "--colors",
        "2",
        "--class",
        "ssync",
        "--rigid",
        "--horizon",
        "20",
    ];
    assert_eq!(lumirend(&args).stdout, lumirend(&args).stdout);
}
