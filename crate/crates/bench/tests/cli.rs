use std::path::Path;
use std::process::{Command, Output};

use ecf_bench::output::{read_csv, read_jsonl};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecf-bench")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CONFIG: &str = r#"{
    "distribution": {"family": "student_t", "df": 4.0, "shift": [1.0, -2.0]},
    "n_grid": [40, 80, 160],
    "d": 2,
    "delta": 0.1,
    "trials": 3,
    "base_seed": 77,
    "estimators": ["mean", "ecf", "gmom"],
    "cn_draws": 10
}"#;

#[test]
fn benchmark_csv_round_trips_and_matches_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, CONFIG).unwrap();
    let csv_out = dir.path().join("out.csv");
    let json_out = dir.path().join("out.jsonl");
    let a = bench(&["benchmark", "--config", path(&cfg), "--out", path(&csv_out), "--deterministic"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = bench(&[
        "benchmark",
        "--config",
        path(&cfg),
        "--out",
        path(&json_out),
        "--format",
        "jsonl",
        "--deterministic",
    ]);
    assert!(b.status.success());

    let text = std::fs::read_to_string(&csv_out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "trial_index,seed,n,d,eta,estimator_id,error,runtime_ms,objective_value,converged"
    );
    let from_csv = read_csv(text.as_bytes()).unwrap();
    let from_json = read_jsonl(std::fs::read(&json_out).unwrap().as_slice()).unwrap();
    assert_eq!(from_csv.len(), 3 * 3 * 3);
    assert_eq!(from_csv, from_json);
    // Baselines carry no objective; the ECF rows do.
    assert!(from_csv.iter().all(|r| r.objective_value.is_some() == (r.estimator_id.as_str() == "ecf")));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, CONFIG).unwrap();
    let run = |seed: &str| bench(&["benchmark", "--config", path(&cfg), "--deterministic", "--seed", seed]).stdout;
    assert_eq!(run("5"), run("5"));
    assert_ne!(run("5"), run("6"));
}

#[test]
fn rates_reports_one_slope_per_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, CONFIG).unwrap();
    let out = bench(&["rates", "--config", path(&cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "estimator_id,n,median_error,q95_error,slope");
    assert_eq!(lines.count(), 9);
}

#[test]
fn estimate_reads_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    std::fs::write(&data, "1.0,2.0\n1.5,2.5\n0.5,1.5\n1.0,2.0\n").unwrap();
    let out = bench(&["estimate", path(&data), "--radius", "1e-6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mu = v["mu_hat"].as_array().unwrap();
    assert!((mu[0].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((mu[1].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(v["method"], "ecf");

    let with_header = dir.path().join("h.csv");
    std::fs::write(&with_header, "a\n3.0\n3.2\n2.8\n3.1\n2.9\n").unwrap();
    let out = bench(&["estimate", path(&with_header), "--header"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["method"], "ecf_oblivious");
    // Without --header the text row is a validation error.
    assert_eq!(bench(&["estimate", path(&with_header)]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = bench(&["benchmark", "--config", path(&missing)]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, CONFIG.replace("\"trials\": 3", "\"trials\": 0")).unwrap();
    let out = bench(&["benchmark", "--config", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, CONFIG.replace("\"trials\"", "\"trails\"")).unwrap();
    assert_eq!(bench(&["benchmark", "--config", path(&unknown)]).status.code(), Some(1));

    let good = dir.path().join("good.json");
    std::fs::write(&good, CONFIG).unwrap();
    let unwritable = dir.path().join("no_such_dir").join("out.csv");
    assert_eq!(
        bench(&["benchmark", "--config", path(&good), "--out", path(&unwritable)]).status.code(),
        Some(2)
    );
    assert_eq!(bench(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bench(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_quick_passes() {
    let out = bench(&["verify", "--quick", "--deterministic"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        ecf_bench::ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        seen += 1;
    }
    assert!(seen >= 4);
}
