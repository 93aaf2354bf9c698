use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pclopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pclopt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_envelope(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error line");
    serde_json::from_str(line).expect("stderr ends with a JSON error object")
}

fn write_instance(dir: &Path, n: usize, kappa: f64, seed: u64) -> PathBuf {
    let path = dir.join(format!("inst-{n}-{seed}.json"));
    let (n, kappa, seed) = (n.to_string(), kappa.to_string(), seed.to_string());
    let out = pclopt(&[
        "generate",
        "--n",
        &n,
        "--kappa",
        &kappa,
        "--seed",
        &seed,
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    path
}

#[test]
fn generate_is_deterministic() {
    let a = pclopt(&["generate", "--n", "20", "--kappa", "0.04", "--seed", "7"]);
    let b = pclopt(&["generate", "--n", "20", "--kappa", "0.04", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = pclopt(&["generate", "--n", "20", "--kappa", "0.04", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["n"], 20);
    assert_eq!(v["gamma_upper"].as_array().unwrap().len(), 190);
}

#[test]
fn grasp_dominates_greedy() {
    let dir = TempDir::new().unwrap();
    for seed in 0..5 {
        let inst = write_instance(dir.path(), 40, 0.06, seed);
        let inst = inst.to_str().unwrap();
        let g = json_stdout(&pclopt(&[
            "solve",
            "--instance",
            inst,
            "--method",
            "greedy",
        ]));
        let r = json_stdout(&pclopt(&[
            "solve",
            "--instance",
            inst,
            "--method",
            "grasp",
            "--seed",
            "1",
        ]));
        assert!(r["revenue"].as_f64().unwrap() >= g["revenue"].as_f64().unwrap());
    }
}

#[test]
fn exact_matches_brute_force() {
    let dir = TempDir::new().unwrap();
    for seed in 0..4 {
        let inst = write_instance(dir.path(), 12, 0.3, seed);
        let inst = inst.to_str().unwrap();
        let e = json_stdout(&pclopt(&["solve", "--instance", inst, "--method", "exact"]));
        let b = json_stdout(&pclopt(&[
            "solve",
            "--instance",
            inst,
            "--method",
            "brute-force",
        ]));
        assert_eq!(e["status"], "optimal");
        assert_eq!(e["assortment"], b["assortment"]);
        assert_eq!(e["a_value"], b["a_value"]);
        assert_eq!(e["revenue"], b["revenue"]);
    }
}

#[test]
fn schema_violation_reports_field_path() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    let text = r#"{"n":3,"alpha":[0,0,0],"weights":[1,0,1],"capacity":1,"beta":0.1,"gamma_upper":[0.5,0.5,0.5]}"#;
    std::fs::write(&bad, text).unwrap();
    let out = pclopt(&[
        "solve",
        "--instance",
        bad.to_str().unwrap(),
        "--method",
        "greedy",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = error_envelope(&out);
    assert_eq!(err["code"], "invalid-instance");
    assert_eq!(err["path"], "/weights/1");
    assert!(err["message"].as_str().unwrap().contains("weights"));
    // The input file is left untouched.
    assert_eq!(std::fs::read_to_string(&bad).unwrap(), text);

    std::fs::write(
        &bad,
        r#"{"n":2,"alpha":[0,"a"],"weights":[1,1],"capacity":1,"beta":0.1,"gamma_upper":[0.5]}"#,
    )
    .unwrap();
    let out = pclopt(&[
        "solve",
        "--instance",
        bad.to_str().unwrap(),
        "--method",
        "greedy",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_envelope(&out)["path"], "/alpha/1");
}

#[test]
fn contradictory_flags_exit_2() {
    let dir = TempDir::new().unwrap();
    let inst = write_instance(dir.path(), 10, 0.3, 0);
    let inst = inst.to_str().unwrap();
    let out = pclopt(&[
        "solve",
        "--instance",
        inst,
        "--method",
        "greedy",
        "--rcl-max",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_envelope(&out)["path"], "--rcl-max");

    let out = pclopt(&["solve", "--instance", inst, "--method", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_envelope(&out)["code"], "usage");

    let out = pclopt(&["generate", "--n", "10", "--kappa", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_exhaustion_is_not_an_error() {
    let dir = TempDir::new().unwrap();
    let inst = write_instance(dir.path(), 150, 0.06, 3);
    let out = pclopt(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--method",
        "exact",
        "--budget-seconds",
        "0.000001",
    ]);
    let v = json_stdout(&out);
    assert!(matches!(
        v["status"].as_str(),
        Some("feasible") | Some("optimal")
    ));
    assert!(v["upper_bound"].as_f64().unwrap() >= v["a_value"].as_f64().unwrap());
}

#[test]
fn evaluate_and_simulate_agree() {
    let dir = TempDir::new().unwrap();
    let inst = write_instance(dir.path(), 6, 0.5, 2);
    let inst = inst.to_str().unwrap();
    let e = json_stdout(&pclopt(&[
        "evaluate",
        "--instance",
        inst,
        "--assortment",
        "0,2,3",
        "--prices",
        "12",
    ]));
    let total: f64 = e["product_probs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .sum::<f64>()
        + e["no_purchase"].as_f64().unwrap();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(e["product_probs"][1], 0.0);

    let args = [
        "simulate",
        "--instance",
        inst,
        "--assortment",
        "0,2,3",
        "--prices",
        "12",
        "--trials",
        "200000",
        "--seed",
        "4",
    ];
    let s = json_stdout(&pclopt(&args));
    assert_eq!(json_stdout(&pclopt(&args)), s);
    for i in 0..6 {
        let diff =
            e["product_probs"][i].as_f64().unwrap() - s["product_freqs"][i].as_f64().unwrap();
        assert!(diff.abs() < 0.005);
    }

    let bad = pclopt(&[
        "evaluate",
        "--instance",
        inst,
        "--assortment",
        "[1,0,2,0,0,0]",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(error_envelope(&bad)["path"], "--assortment/2");
}

#[test]
fn bench_writes_report_and_log() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.csv");
    let args = [
        "bench",
        "--grid",
        "15:0.1,20:0.06",
        "--instances",
        "3",
        "--seed",
        "5",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "1",
    ];
    let run = pclopt(&args);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().last().unwrap().starts_with("Average,----"));
    let log = std::fs::read_to_string(dir.path().join("report.csv.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 6);

    let strip = |text: &str| -> Vec<Value> {
        text.lines()
            .map(|l| {
                let mut v: Value = serde_json::from_str(l).unwrap();
                for m in ["exact", "lp_bound", "greedy", "grasp"] {
                    v[m]["seconds"] = Value::Null;
                }
                v
            })
            .collect()
    };
    assert!(pclopt(&args).status.success());
    let again = std::fs::read_to_string(dir.path().join("report.csv.jsonl")).unwrap();
    assert_eq!(strip(&log), strip(&again));

    let none = pclopt(&[
        "bench",
        "--grid",
        "15:0.1",
        "--methods",
        "",
        "--format",
        "json",
    ]);
    assert_eq!(String::from_utf8_lossy(&none.stdout).trim(), "[]");
    let bad = pclopt(&["bench", "--methods", "exact,magic"]);
    assert_eq!(bad.status.code(), Some(2));
}
