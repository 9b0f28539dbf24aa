use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use topix::indices::IndexFamily;
use topix::simulate::{run_experiment, EdgeScale, ExperimentConfig, ModelSpec};
use topix_cli::format::to_json;
use topix_cli::report::{experiment_document, ReportDocument};

fn topix(args: &[&str]) -> Output {
    topix_env(args, None)
}

fn topix_env(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_topix"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("TOPIX_THREADS", t),
        None => cmd.env_remove("TOPIX_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn all_numbers_finite(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
        Value::Array(a) => a.iter().all(all_numbers_finite),
        Value::Object(o) => o.values().all(all_numbers_finite),
        _ => true,
    }
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(out)).unwrap();
    assert!(all_numbers_finite(&v));
    v
}

#[test]
fn index_command() {
    let dir = tempfile::tempdir().unwrap();
    let p3 = write(dir.path(), "p3.txt", "1 2\n2 3\n");
    let k3 = write(dir.path(), "k3.txt", "# triangle\n1 2\n2 3\n3 1\n1 2\n");
    let loop_file = write(dir.path(), "loop.txt", "3 3\n");

    let out = topix(&["index", "--graph", &p3, "--family", "randic"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "1.41421356237\n");
    assert_eq!(stdout(&topix(&["index", "--graph", &k3, "--family", "hyper-zagreb"])), "48\n");

    assert_eq!(topix(&["index", "--graph", &p3, "--family", "general-randic:0"]).status.code(), Some(2));
    assert_eq!(topix(&["index", "--graph", &p3, "--family", "zagreb"]).status.code(), Some(2));
    assert_eq!(topix(&["index", "--graph", &loop_file, "--family", "randic"]).status.code(), Some(2));
    let missing = dir.path().join("missing.txt");
    assert_eq!(
        topix(&["index", "--graph", missing.to_str().unwrap(), "--family", "randic"]).status.code(),
        Some(1)
    );
}

#[test]
fn theory_command() {
    let v = json(&topix(&["theory", "--model", "er", "--n", "100", "--p", "0.1", "--family", "hyper-zagreb"]));
    let t = &v["theory"];
    assert!((t["expectation_approx"].as_f64().unwrap() - 230947.2).abs() < 1e-6);
    assert!((t["exact_expectation"].as_f64().unwrap() - 239679.0).abs() < 1e-6);
    assert_eq!(t["branch"], "linear");
    assert!(t["c1_ratio"].as_f64().unwrap() > 0.0);

    let v = json(&topix(&["theory", "--model", "er", "--n", "100", "--p", "0.1", "--family", "randic"]));
    assert_eq!(v["theory"]["branch"], "randic_critical");
    assert!((v["theory"]["sigma_sq"].as_f64().unwrap() - 0.018051).abs() < 1e-6);

    let v = json(&topix(&[
        "theory", "--model", "exp", "--n", "100", "--alpha", "0.3", "--kappa", "1", "--family", "randic",
    ]));
    assert!(v["theory"]["sigma_sq"].is_null());
    let warnings: Vec<&str> = v["warnings"].as_array().unwrap().iter().map(|w| w.as_str().unwrap()).collect();
    assert!(warnings.iter().any(|w| w.contains("no theoretical sigma for heterogeneous critical case")));
}

#[test]
fn model_flag_validation() {
    let both = topix(&["theory", "--model", "er", "--n", "50", "--p", "0.1", "--alpha-p", "0.3", "--family", "isi"]);
    assert_eq!(both.status.code(), Some(2));
    let neither = topix(&["theory", "--model", "er", "--n", "50", "--family", "isi"]);
    assert_eq!(neither.status.code(), Some(2));
    let no_kappa = topix(&["theory", "--model", "exp", "--n", "50", "--alpha", "0.3", "--family", "isi"]);
    assert_eq!(no_kappa.status.code(), Some(2));
    let bad_p = topix(&["theory", "--model", "er", "--n", "50", "--p", "1.5", "--family", "isi"]);
    assert_eq!(bad_p.status.code(), Some(2));
    let bad_threads = topix_env(&["theory", "--model", "er", "--n", "50", "--p", "0.1", "--family", "isi"], Some("zero"));
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn matrix_model() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "w.txt", "# weights\n0 1 0.5\n1 0 1\n0.5 1 0\n");
    let v = json(&topix(&[
        "oracle", "--model", "matrix", "--matrix", &m, "--p", "0.4", "--beta", "0.5", "--family", "forgotten",
    ]));
    assert!(v["exact"]["expectation"].as_f64().unwrap() > 0.0);
    let missing = dir.path().join("none.txt");
    let out = topix(&[
        "theory", "--model", "matrix", "--matrix", missing.to_str().unwrap(), "--p", "0.4", "--beta", "0.5",
        "--family", "forgotten",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_command() {
    let v = json(&topix(&["oracle", "--n", "4", "--p", "0.5", "--family", "hyper-zagreb"]));
    assert!((v["exact"]["expectation"].as_f64().unwrap() - 51.0).abs() < 1e-12);
    let v = json(&topix(&["oracle", "--n", "2", "--p", "0.5", "--family", "randic"]));
    assert_eq!(v["exact"]["expectation"].as_f64(), Some(0.5));
    assert_eq!(v["exact"]["variance"].as_f64(), Some(0.25));
    assert_eq!(topix(&["oracle", "--n", "6", "--p", "0.5", "--family", "randic"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str, threads: Option<&str>| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let rep = dir.path().join(format!("{tag}.json"));
        let out = topix_env(
            &[
                "simulate", "--model", "exp", "--n", "80", "--alpha", "0.3", "--kappa", "1", "--family",
                "forgotten", "--replicates", "150", "--seed", "7", "--out", csv.to_str().unwrap(), "--report",
                rep.to_str().unwrap(),
            ],
            threads,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(csv).unwrap(), std::fs::read(rep).unwrap(), out.stdout)
    };
    let a = run("a", None);
    let b = run("b", Some("1"));
    let c = run("c", Some("4"));
    assert_eq!(a, b);
    assert_eq!(a, c);

    let csv = String::from_utf8(a.0).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("replicate,index_value,z_value"));
    assert_eq!(lines.count(), 150);
    let v: Value = serde_json::from_slice(&a.1).unwrap();
    assert!(all_numbers_finite(&v));
    for key in ["mean", "variance", "variance_ratio", "skewness", "excess_kurtosis", "ks_statistic"] {
        assert!(v["empirical"][key].is_number(), "{key}");
    }
    for key in ["sigma_sq", "expectation_approx", "c1_ratio", "branch"] {
        assert!(!v["theory"][key].is_null(), "{key}");
    }
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn simulate_single_replicate_warns() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let out = topix(&[
        "simulate", "--model", "er", "--n", "50", "--alpha-p", "0.3", "--family", "isi", "--replicates", "1",
        "--report", rep.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&std::fs::read(rep).unwrap()).unwrap();
    assert!(!v["warnings"].as_array().unwrap().is_empty());
    assert!(v["empirical"]["variance"].is_null());
    assert!(all_numbers_finite(&v));
}

#[test]
fn simulate_rejects_critical_scale_off_critical() {
    let out = topix(&[
        "simulate", "--n", "50", "--p", "0.2", "--family", "isi", "--replicates", "10", "--scale", "randic-critical",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = topix(&["simulate", "--n", "50", "--p", "0.2", "--family", "isi", "--replicates", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_round_trip() {
    let mut cfg = ExperimentConfig::new(
        ModelSpec::Er { n: 60, scale: EdgeScale::AlphaP(0.3) },
        IndexFamily::randic(),
        40,
        3,
    );
    cfg.threads = Some(2);
    let doc = experiment_document(&run_experiment(&cfg).unwrap()).unwrap();
    let back: ReportDocument = serde_json::from_str(&to_json(&doc).unwrap()).unwrap();
    assert_eq!(back, doc);

    let cfg = ExperimentConfig::new(
        ModelSpec::ExpKernel { n: 30, alpha: 0.2, kappa: 2.0 },
        IndexFamily::general_randic(0.7).unwrap(),
        5,
        1,
    );
    let doc = experiment_document(&run_experiment(&cfg).unwrap()).unwrap();
    let back: ReportDocument = serde_json::from_str(&to_json(&doc).unwrap()).unwrap();
    assert_eq!(back, doc);
}

#[test]
fn phase_command() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("phase.csv");
    let out = topix(&[
        "phase", "--taus", "-0.5,1", "--ns", "40,80", "--replicates", "20", "--seed", "2", "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "tau,n,p,empirical_var,theory_var,fitted_exponent");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("-0.5,40,"));
    let block: Vec<&str> = lines[1..3].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(block[0], block[1]);

    let single = topix(&["phase", "--ns", "200", "--replicates", "10"]);
    assert_eq!(single.status.code(), Some(2));
}
