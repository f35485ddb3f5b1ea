use std::process::{Command, Output};

use serde_json::Value;

fn stabenv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabenv")).args(args).env_remove("STABENV_PRECISION").output().unwrap()
}

fn report(args: &[&str]) -> Value {
    let out = stabenv(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn fixed_points_of_gr_2_4() {
    let v = report(&["fixed-points", "--n", "4", "--k", "2"]);
    assert_eq!(v["count"], 6);
    assert_eq!(v["subsets"], serde_json::json!([[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]]));
    assert_eq!(v["diagrams"], serde_json::json!([[], [1], [1, 1], [2], [2, 1], [2, 2]]));
    assert_eq!(v["bijection"][5]["subset"], serde_json::json!([3, 4]));
}

#[test]
fn fixed_points_of_p1() {
    let v = report(&["fixed-points", "--n", "2", "--k", "1"]);
    assert_eq!(v["count"], 2);
    assert_eq!(v["subsets"], serde_json::json!([[1], [2]]));
}

#[test]
fn trees_of_a_square() {
    let v = report(&["trees", "--n", "5", "--k", "2", "--lambda", "2,2"]);
    assert_eq!(v["count"], 2);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 2);
}

#[test]
fn configuration_errors_exit_with_two() {
    assert_eq!(stabenv(&["fixed-points", "--n", "3", "--k", "2"]).status.code(), Some(2));
    assert_eq!(stabenv(&["trees", "--n", "4", "--k", "2", "--lambda", "3"]).status.code(), Some(2));
    assert_eq!(stabenv(&["verify", "mirror", "--q-re", "1.5"]).status.code(), Some(2));
    assert_eq!(stabenv(&["verify", "mother-k1", "--n", "4", "--k", "2"]).status.code(), Some(2));
}

#[test]
fn failing_tolerance_exits_with_one() {
    let out = stabenv(&["verify", "theta-identities", "--samples", "3", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn reports_are_reproducible() {
    let args = ["verify", "mirror", "--n", "4", "--k", "2", "--seed", "3"];
    let a = stabenv(&args);
    let b = stabenv(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["pairs"].as_array().unwrap().len(), 36);
    assert!(v["x_params"]["u1"]["re"].is_string());
    assert_eq!(v["limit"]["schedule"].as_array().unwrap().len(), 4);
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_stabenv"))
        .args(["verify", "theta-identities", "--samples", "2"])
        .env("STABENV_PRECISION", "320")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["elliptic"]["precision_bits"], 320);
}

#[test]
fn report_written_to_file() {
    let path = std::env::temp_dir().join(format!("stabenv-cli-test-{}.json", std::process::id()));
    let out = stabenv(&["verify", "mother-k1", "--n", "3", "--k", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(v["suite"], "mother-k1");
    assert_eq!(v["pass"], true);
}

#[test]
fn xprime_matrix_has_limit_schedule() {
    let v = report(&["matrix", "xprime", "--n", "2", "--k", "1", "--bold"]);
    assert_eq!(v["matrix"]["entries"].as_array().unwrap().len(), 2);
    assert!(v["limit"]["epsilon"].is_string());
}
