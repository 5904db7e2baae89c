use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn cantor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cantor"))
        .args(args)
        .env_remove("CANTOR_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json", "--deterministic"]);
    let o = cantor(&all);
    assert!(
        o.status.code().unwrap() <= 1,
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn scheme_reports() {
    let v = json(&["scheme", "--set", "b=3;S=0,2"]);
    assert!((v["d"].as_f64().unwrap() - 0.630930).abs() < 1e-6);
    let v = json(&["scheme", "--set", "b=9;S=0,2,6,8"]);
    assert_eq!(v["b0"], 3);
    assert_eq!(v["r"], 2);
    assert_eq!(
        cantor(&["scheme", "--set", "b=3;S=0,1,2"]).status.code(),
        Some(2)
    );
}

#[test]
fn member_exit_codes() {
    assert_eq!(cantor(&["member", "1/4"]).status.code(), Some(0));
    let o = cantor(&["member", "1/2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not-member"));
    assert_eq!(cantor(&["member", "5/4"]).status.code(), Some(2));
    assert_eq!(cantor(&["member", "x"]).status.code(), Some(2));
    assert_eq!(cantor(&["bogus"]).status.code(), Some(2));
}

#[test]
fn approx_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let o = cantor(&["approx", "--x-seed", "1", "--n", "3", "--format", "json"]);
    assert!(o.status.success());
    fs::write(&path, &o.stdout).unwrap();
    let v = json(&["verify", "--cert", path.to_str().unwrap()]);
    assert_eq!(v["valid"], true);

    // the same certificate does not fit another stream
    let o = cantor(&["verify", "--cert", path.to_str().unwrap(), "--x-seed", "2"]);
    assert_eq!(o.status.code(), Some(1));

    let mut doc: Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    doc["certificate"]["p"] = "3".into();
    fs::write(&path, doc.to_string()).unwrap();
    assert_eq!(
        cantor(&["verify", "--cert", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn census_counts() {
    let v = json(&["census", "--from", "1", "--to", "3"]);
    assert_eq!(v["count"], 4);
    let v = json(&[
        "census",
        "--from",
        "1",
        "--to",
        "3",
        "--convention",
        "half-open",
    ]);
    assert_eq!(v["count"], 2);
}

#[test]
fn census_checkpoint_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("run.jsonl");
    let args = [
        "census",
        "--n-lo",
        "2",
        "--n-hi",
        "5",
        "--chunk",
        "50",
        "--checkpoint",
        ck.to_str().unwrap(),
    ];
    let full = json(&args);
    let text = fs::read_to_string(&ck).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let keep = lines.len() / 2;
    let mut torn = lines[..keep].join("\n");
    torn.push_str("\n{\"scheme\":\"b=3;S=0");
    fs::write(&ck, torn).unwrap();
    assert_eq!(json(&args), full);
    let counts: Vec<u64> = full["bands"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["count"].as_u64().unwrap())
        .collect();
    assert_eq!(counts, vec![24, 52, 188, 400]);
}

#[test]
fn phi_matches_reference() {
    let o = cantor(&["phi", "--n", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("1.807692"));
    let v = json(&["phi", "--n", "4"]);
    assert_eq!(format!("{:.3}", v["value"].as_f64().unwrap()), "1.808");
}

#[test]
fn deterministic_output_is_stable() {
    let args = ["ladder", "--x-seed", "5", "--n-max", "5"];
    assert_eq!(json(&args), json(&args));
    let a = cantor(&[
        "census",
        "--from",
        "1",
        "--to",
        "500",
        "--format",
        "json",
        "--deterministic",
    ]);
    let b = cantor(&[
        "census",
        "--from",
        "1",
        "--to",
        "500",
        "--format",
        "json",
        "--deterministic",
        "--threads",
        "1",
    ]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains("\"ms\""));
}

#[test]
fn config_file_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cantor.toml");
    fs::write(&path, "scheme = \"b=5;S=0,3\"\nformat = \"json\"\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cantor"))
        .arg("scheme")
        .env("CANTOR_CONFIG", &path)
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["b"], 5);

    // the printed config reloads to the same settings
    let printed = stdout(&cantor(&[
        "config",
        "--config",
        path.to_str().unwrap(),
        "--threads",
        "2",
    ]));
    let again = dir.path().join("again.toml");
    fs::write(&again, &printed).unwrap();
    assert_eq!(
        stdout(&cantor(&["config", "--config", again.to_str().unwrap()])),
        printed
    );

    fs::write(&path, "scheme = 3").unwrap();
    assert_eq!(
        cantor(&["scheme", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn resource_and_precision_codes() {
    assert_eq!(cantor(&["approx", "--n", "30"]).status.code(), Some(3));
    assert_eq!(
        cantor(&["approx", "--x-digits", "2,0", "--n", "3"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        cantor(&["approx", "--x-digits", "1", "--n", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn lab_commands() {
    let v = json(&["convergents", "--x-rational", "3/4"]);
    assert_eq!(v["convergents"], serde_json::json!(["0/1", "1/1", "3/4"]));
    let v = json(&["extrinsic", "--x-rational", "1/4"]);
    assert_eq!(v["inside"], serde_json::json!(["0/1", "1/4"]));
    let v = json(&[
        "score",
        "--x-rational",
        "1/4",
        "--q-max",
        "10",
        "--epsilon",
        "0.1",
    ]);
    let last = v["records"].as_array().unwrap().last().unwrap().clone();
    assert_eq!((last["p"].as_u64(), last["q"].as_u64()), (Some(1), Some(4)));
    let csv = stdout(&cantor(&[
        "score", "--x-seed", "3", "--q-max", "81", "--format", "csv",
    ]));
    assert!(csv.starts_with("q,p,error_lo,error_hi,badness,epsilon\n"));
    let v = json(&["forms", "--max-len", "1"]);
    assert_eq!(v["values"], serde_json::json!(["0/1", "1/1", "2/3"]));
}

#[test]
fn table1_side_by_side() {
    let o = cantor(&["phi", "--table1", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}
