use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lastzero(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lastzero")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

const BM: [&str; 6] = ["--model", "bm", "--mu", "1", "--sigma", "1"];
const CL: [&str; 8] = ["--model", "cl", "--mu", "2", "--lambda", "1", "--rho", "1"];

fn with<'a>(cmd: &'a str, model: &[&'a str], rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(model);
    v.extend_from_slice(rest);
    v
}

#[test]
fn solve_bm() {
    let doc = json(&lastzero(&with("solve", &BM, &[])));
    assert_eq!(doc["a_star"].as_f64().unwrap(), 0.839173495008);
    assert_eq!(doc["regime"], "SmoothFit");
    assert_eq!(doc["method"], "AnalyticBM");
    assert!((doc["V0"].as_f64().unwrap() + 0.474144196141).abs() < 1e-12);
    assert!((doc["E_g"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn solve_cl_continuous_fit() {
    let doc = json(&lastzero(&["solve", "--model", "cl", "--mu", "4", "--lambda", "1", "--rho", "1"]));
    assert_eq!(doc["a_star"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["regime"], "ContinuousFitOnly");
    assert_eq!(doc["F0"].as_f64().unwrap(), 0.75);
}

#[test]
fn solve_csv_is_key_value() {
    let text = stdout(&lastzero(&with("solve", &CL, &["--format", "csv"])));
    assert!(text.starts_with("key,value\n"));
    assert!(text.ends_with('\n'));
    assert!(text.contains("a_star,1.16614775207"));
}

#[test]
fn validation_errors_exit_2() {
    let out = lastzero(&["verify", "--model", "cl", "--mu", "1", "--lambda", "1", "--rho", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid input"));
    assert_eq!(lastzero(&["solve", "--model", "bm", "--mu", "-1", "--sigma", "1"]).status.code(), Some(2));
    assert_eq!(lastzero(&with("simulate", &BM, &["--paths", "0"])).status.code(), Some(2));
}

#[test]
fn curve_bm_rows() {
    let doc = json(&lastzero(&with("curve", &BM, &["--format", "json"])));
    let a_star = doc["a_star"].as_f64().unwrap();
    let xs: Vec<f64> = doc["x"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let curves = doc["V"].as_array().unwrap();
    assert_eq!(curves.len(), 3);
    let at = xs.iter().position(|&x| x == a_star).expect("a* row");
    assert_eq!(curves[1]["values"][at].as_f64().unwrap(), 0.0);
    // above the optimum the value turns positive just below the threshold
    assert!(curves[2]["values"].as_array().unwrap().iter().any(|v| v.as_f64().unwrap() > 0.0));
    assert!(curves[1]["values"].as_array().unwrap().iter().all(|v| v.as_f64().unwrap() <= 0.0));
}

#[test]
fn curve_cl_csv() {
    let text = stdout(&lastzero(&with("curve", &CL, &["--xmin", "-1", "--xmax", "2", "--step", "0.5"])));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("x,F,G,H,V_a="));
    for line in lines {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        if cells[0] < 0.0 {
            assert_eq!(cells[1], 0.0);
            assert_eq!(cells[2], -1.0);
        }
    }
}

#[test]
fn config_file_round_trip() {
    let first = stdout(&lastzero(&with("solve", &CL, &[])));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solve.json");
    std::fs::write(&path, &first).unwrap();
    let second = stdout(&lastzero(&["solve", "--config", path.to_str().unwrap()]));
    assert_eq!(first, second);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"model": {"family": "bm", "mu": 1, "sigma": 1}}"#).unwrap();
    let doc = json(&lastzero(&["solve", "--config", path.to_str().unwrap(), "--sigma", "2"]));
    assert!((doc["E_g"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

fn simulate_to(path: &Path, extra: &[&str]) {
    let mut args = with("simulate", &CL, &["--paths", "2000", "--seed", "3", "--format", "csv", "--out"]);
    args.push(path.to_str().unwrap());
    args.extend_from_slice(extra);
    let out = lastzero(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.csv");
    simulate_to(&path, &["--a", "1,2"]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with('\n'));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "quantity,a,x,q,estimate,std_error,n_paths,seed_used");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("MeanAbsError,1,0,,"));
    assert!(rows[3].starts_with("ExpectedG,,0,,"));
    assert!(rows[3].ends_with(",2000,3"));
}

#[test]
fn verify_passes_for_cl() {
    let out = lastzero(&with("verify", &CL, &["--paths", "20000"]));
    let text = stdout(&out);
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn verify_flags_coarse_grid() {
    let out = lastzero(&with("verify", &BM, &["--dt", "0.5", "--paths", "20000"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
