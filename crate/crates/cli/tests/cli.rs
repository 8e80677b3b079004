use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_taulasso"));
    c.env_remove("TAULASSO_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// `y = 1 + 3x1 − 2x3 + noise` with a few gross response outliers.
fn write_data(dir: &Path) -> PathBuf {
    let mut s = String::from("y,x1,x2,x3,x4\n");
    for i in 0..60 {
        let f = i as f64;
        let x: Vec<f64> = (0..4).map(|j| ((f + 1.0) * (j as f64 + 1.3)).sin() * 2.0 + 0.1 * j as f64).collect();
        let mut y = 1.0 + 3.0 * x[0] - 2.0 * x[2] + 0.1 * (f * 0.7).cos();
        if i % 15 == 0 {
            y += 50.0;
        }
        s.push_str(&format!("{y},{},{},{},{}\n", x[0], x[1], x[2], x[3]));
    }
    let path = dir.join("data.csv");
    fs::write(&path, s).unwrap();
    path
}

fn quick<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend(["--n-lambda", "6", "--starts", "2"]);
    v
}

#[test]
fn fit_writes_json_with_fixed_key_order() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let o = run(&quick(&["fit", "--input", data.to_str().unwrap(), "--lambda", "0.01", "--estimator", "tau-lasso"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["beta"].as_array().unwrap().len(), 4);
    assert!((v["beta"][0].as_f64().unwrap() - 3.0).abs() < 0.2, "{text}");
    assert!((v["beta"][2].as_f64().unwrap() + 2.0).abs() < 0.2, "{text}");
    assert_eq!(v["lambda"].as_f64().unwrap(), 0.01);
    let keys = ["\"beta\"", "\"s\"", "\"tau\"", "\"lambda\"", "\"active_set\"", "\"objective\"", "\"trace_length\"", "\"seed\""];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{pos:?}");
    assert_eq!(v["config"]["pipeline"]["folds"], 5);
}

#[test]
fn adaptive_cv_fit_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    for out in [&out1, &out2] {
        let o = run(&quick(&[
            "fit", "--input", data.to_str().unwrap(), "--estimator", "adaptive", "--pilot", "s-ridge", "--cv", "--seed", "4",
            "--output", out.to_str().unwrap(),
        ]));
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(&out1).unwrap();
    assert_eq!(a, fs::read(&out2).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["cv"]["lambda_grid"].as_array().unwrap().len(), 6);
    assert_eq!(v["pilot"]["kind"], "s-ridge");
    assert_eq!(v["seed"], 4);
}

#[test]
fn cv_command_with_tau_lasso_pilot() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let o = run(&quick(&["cv", "--input", data.to_str().unwrap(), "--estimator", "adaptive", "--pilot", "tau-lasso"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["command"], "cv");
    let best = v["cv"]["best_index"].as_u64().unwrap() as usize;
    assert_eq!(v["cv"]["lambda_grid"][best], v["lambda"]);
}

#[test]
fn malformed_csv_reports_line_and_column() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "y,x1,x2\n1,2,3\n4,oops,6\n").unwrap();
    let o = run(&["fit", "--input", path.to_str().unwrap(), "--lambda", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains(":3") && e.contains("column 2") && e.contains("x1"), "{e}");

    fs::write(&path, "y,x1\n1,2\n3\n").unwrap();
    let o = run(&["fit", "--input", path.to_str().unwrap(), "--lambda", "0.1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    fs::write(&path, "response,x1\n1,2\n").unwrap();
    let o = run(&["fit", "--input", path.to_str().unwrap(), "--lambda", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("'y'"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let data = data.to_str().unwrap();
    // neither a penalty nor cross-validation
    assert_eq!(run(&["fit", "--input", data]).status.code(), Some(2));
    assert_eq!(run(&["fit", "--input", data, "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["fit", "--input", data, "--lambda", "0.1", "--folds", "1"]).status.code(), Some(2));
    assert_eq!(run(&["fit", "--input", data, "--lambda", "0.1", "--c0", "6", "--c1", "5"]).status.code(), Some(2));
    assert_eq!(run(&["fit", "--input", "/nonexistent.csv", "--lambda", "0.1"]).status.code(), Some(2));
    // seed is mandatory for simulations
    assert_eq!(run(&["simulate", "--trials", "1"]).status.code(), Some(2));
    assert_eq!(run(&["influence", "--toy-1d"]).status.code(), Some(2));
    let o = run(&["simulate", "--scenario", "scenario9", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario9"));
    assert_eq!(run(&["breakdown", "--ystar", "5:1:3"]).status.code(), Some(2));
    let o = run(&["simulate", "--contaminate", "--placement", "mixed", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mixed"));
}

#[test]
fn simulate_writes_table_and_report() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("table.csv");
    let json = dir.path().join("table.json");
    let o = run(&quick(&[
        "simulate", "--scenario", "scenario1", "--contaminate", "--placement", "shared", "--trials", "2", "--n", "40", "--estimators",
        "tau-lasso,oracle", "--seed", "3", "--output", csv.to_str().unwrap(), "--json", json.to_str().unwrap(),
    ]));
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with("scenario,error_law,contaminated,estimator,metric,mean,se"));
    // 2 estimators × 5 metrics
    assert_eq!(lines.count(), 10);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["config"]["trials"], 2);
}

#[test]
fn breakdown_and_overshrink_csv() {
    let o = run(&quick(&[
        "breakdown", "--ystar", "1:10:2", "--trials", "2", "--n", "40", "--estimators", "tau-lasso", "--threads", "1",
    ]));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("ystar,estimator,rmse"));
    assert_eq!(text.lines().count(), 3);

    let o = run(&quick(&[
        "breakdown", "--gross-magnitude", "1e6", "--trials", "2", "--n", "40", "--estimators", "adaptive",
    ]));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("estimator,trial,clean_norm"));
    assert_eq!(text.lines().count(), 3);

    let o = run(&quick(&["overshrink", "--trials", "2", "--n", "30"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    // header + 6 λ × 2 estimators × 5 coefficients
    assert_eq!(text.lines().count(), 1 + 6 * 2 * 5);
}

#[test]
fn influence_grid_csv() {
    let o = bin()
        .args(["influence", "--toy-1d", "--n", "200", "--grid", "-2:2:2", "--seed", "5"])
        .env("TAULASSO_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "y0,x0_1,if_scale,if_beta1,sc_scale,sc_beta1");
    assert_eq!(lines.count(), 9);
    assert!(stderr(&o).contains("\"lambda_scale\":0.1"));

    let o = run(&["influence", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
