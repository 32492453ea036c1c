use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fracpoisson"));
    c.env_remove("FRACPOISSON_THREADS").env("RUST_LOG", "off");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn single_value(args: &[&str]) -> f64 {
    let o = run(args);
    assert_eq!(
        code(&o),
        0,
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o).trim().parse().expect("one number")
}

/// Data rows of a CSV file as string fields, header dropped.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .expect("csv written")
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn eval_renewal_function() {
    let v = single_value(&["eval", "--fn", "renewal", "--beta", "0.5", "--t", "1"]);
    // m(1) = 1/Γ(3/2) = 2/√π
    assert!((v - std::f64::consts::FRAC_2_SQRT_PI).abs() <= 1e-14, "{v}");
}

#[test]
fn eval_poisson_reduction() {
    let v = single_value(&["eval", "--fn", "pmf", "--beta", "1", "--t", "1", "--n", "0"]);
    assert!((v - (-1f64).exp()).abs() <= 1e-14, "{v}");
}

#[test]
fn eval_ml_at_zero_prints_one() {
    let o = run(&["eval", "--fn", "ml", "--alpha", "0.7", "--z", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn eval_negative_argument_and_json() {
    let o = run(&[
        "eval", "--fn", "ml", "--alpha", "0.5", "--z", "-1", "--format", "json",
    ]);
    assert_eq!(code(&o), 0);
    let rows: Value = serde_json::from_slice(&o.stdout).expect("json");
    let v = rows[0]["value"].as_f64().expect("value");
    // E_{1/2}(-1) = e erfc(1)
    assert!((v - 0.427583576155807).abs() <= 1e-14, "{v}");
}

#[test]
fn eval_over_a_time_grid_as_csv() {
    let o = run(&[
        "eval", "--fn", "survival", "--beta", "1", "--t-grid", "0:2:0.5", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("function,p1,p2,n,x,value"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        let (t, v): (f64, f64) = (f[4].parse().unwrap(), f[5].parse().unwrap());
        assert!((v - (-t).exp()).abs() <= 1e-14, "{row}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["eval", "--fn", "renewal", "--beta", "1.5", "--t", "1"],
        &["eval", "--fn", "pmf", "--beta", "0.5", "--t", "1"],
        &[
            "eval", "--fn", "ml", "--alpha", "0.5", "--z", "1", "--beta", "0.5",
        ],
        &["eval", "--fn", "renewal", "--beta", "0.5", "--t", "-1"],
        &[
            "eval", "--fn", "renewal", "--beta", "0.5", "--t-grid", "2:1:0.5",
        ],
        &["eval", "--fn", "bessel", "--z", "1"],
        &[
            "simulate", "--route", "renewal", "--beta", "0.5", "--t", "1", "--paths", "10",
        ],
        &[
            "simulate", "--route", "renewal", "--beta", "0.5", "--t", "1", "--paths", "0",
            "--seed", "1",
        ],
        &["verify", "--suite", "theorem"],
        &["pmf-table", "--beta", "0.5", "--t", "1", "--eps-tail", "2"],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn bad_thread_variable_is_a_usage_error() {
    let o = bin()
        .env("FRACPOISSON_THREADS", "zero")
        .args(["eval", "--fn", "renewal", "--beta", "0.5", "--t", "1"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let o = run(&["eval", "--fn", "ml", "--alpha", "0.1", "--z", "1.7"]);
    assert_eq!(code(&o), 3);
    let msg = String::from_utf8_lossy(&o.stderr);
    assert_eq!(msg.lines().count(), 1, "{msg}");
}

#[test]
fn path_budget_failure_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("big.csv");
    let o = run(&[
        "simulate",
        "--route",
        "renewal",
        "--beta",
        "0.5",
        "--t",
        "1e12",
        "--paths",
        "1",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
}

#[test]
fn failed_manifest_removes_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let manifest = dir.path().join("missing").join("m.json");
    let o = run(&[
        "simulate",
        "--route",
        "renewal",
        "--beta",
        "0.5",
        "--t",
        "1",
        "--paths",
        "5",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
}

fn simulate_to(dir: &Path, name: &str, extra: &[&str], threads: Option<&str>) -> Vec<u8> {
    let out = dir.join(name);
    let mut c = bin();
    if let Some(n) = threads {
        c.env("FRACPOISSON_THREADS", n);
    }
    let o = c
        .args(["simulate", "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    fs::read(&out).unwrap()
}

#[test]
fn simulate_accounts_for_every_path_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = [
        "--route", "renewal", "--beta", "0.5", "--t", "1", "--paths", "1000", "--seed", "42",
    ];
    let a = simulate_to(dir.path(), "a.csv", &cfg, None);
    let b = simulate_to(dir.path(), "b.csv", &cfg, None);
    assert_eq!(a, b);

    let rows = csv_rows(&dir.path().join("a.csv"));
    let total: u64 = rows.iter().map(|r| r[3].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 1000);
    assert!(rows.iter().all(|r| r[6] == "renewal"));

    let m: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m["seed"], 42);
    assert_eq!(m["paths"], 1000);
    assert_eq!(m["tool"], "fracpoisson");
    assert!(m["version"].is_string());
    assert!(m["dt_star"].is_f64());
    assert!(m["wall_time_s"].is_f64());
    assert_eq!(m["config"]["beta"], 0.5);
}

#[test]
fn simulate_output_does_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = [
        "--route",
        "parametric",
        "--beta",
        "0.6",
        "--t-grid",
        "0.5:2:0.5",
        "--paths",
        "3000",
        "--seed",
        "9",
    ];
    let one = simulate_to(dir.path(), "one.csv", &cfg, Some("1"));
    let four = simulate_to(dir.path(), "four.csv", &cfg, Some("4"));
    assert_eq!(one, four);
}

#[test]
fn parametric_route_at_beta_one_matches_renewal() {
    let dir = tempfile::tempdir().unwrap();
    let common = [
        "--beta", "1", "--t", "2", "--paths", "20000", "--seed", "5", "--n-max", "12",
    ];
    let mut cfg = vec!["--route", "renewal"];
    cfg.extend(common);
    simulate_to(dir.path(), "r.csv", &cfg, None);
    cfg[1] = "parametric";
    simulate_to(dir.path(), "p.csv", &cfg, None);
    let r = csv_rows(&dir.path().join("r.csv"));
    let p = csv_rows(&dir.path().join("p.csv"));
    assert_eq!(r.len(), p.len());
    for (a, b) in r.iter().zip(&p) {
        let (pa, pb): (f64, f64) = (a[4].parse().unwrap(), b[4].parse().unwrap());
        let (sa, sb): (f64, f64) = (a[5].parse().unwrap(), b[5].parse().unwrap());
        let se = (sa * sa + sb * sb).sqrt().max(1e-3);
        assert!((pa - pb).abs() <= 5.0 * se, "n = {}: {pa} vs {pb}", a[2]);
    }
}

#[test]
fn pmf_table_extends_to_n_max() {
    let o = run(&[
        "pmf-table",
        "--beta",
        "0.5",
        "--t",
        "1",
        "--n-max",
        "40",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let probs = v[0]["probs"].as_array().unwrap();
    assert_eq!(probs.len(), 41);
    let sum: f64 = probs.iter().map(|p| p.as_f64().unwrap()).sum();
    let tail = v[0]["tail_mass"].as_f64().unwrap();
    assert!((sum + tail - 1.0).abs() <= 1e-10);
}

#[test]
fn renewal_table_residuals_are_small() {
    let o = run(&["renewal-table", "--beta", "0.7", "--t-grid", "0.5:2:0.5"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header
        .iter()
        .position(|h| *h == "residual")
        .expect("residual column");
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let r: f64 = row.split(',').nth(col).unwrap().parse().unwrap();
        assert!(r.abs() <= 1e-6, "{row}");
    }
}

#[test]
fn verify_deterministic_suites_pass() {
    for suite in ["normalization", "pairs", "asymptotics"] {
        let o = run(&["verify", "--suite", suite]);
        assert_eq!(code(&o), 0, "{suite}: {}", stdout(&o));
        let text = stdout(&o);
        assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 3);
        assert!(!text.contains("FAIL"));
    }
}

#[test]
fn verify_theorem_passes_with_a_modest_ensemble() {
    let o = run(&[
        "verify", "--suite", "theorem", "--paths", "20000", "--seed", "7",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn verify_failure_exits_1_and_still_writes_the_report() {
    // too few paths for the power check to separate the two orders
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&[
        "verify",
        "--suite",
        "theorem",
        "--paths",
        "20",
        "--seed",
        "7",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let checks = v["checks"].as_array().expect("checks");
    assert!(checks.iter().any(|c| c["pass"] == false));
}
