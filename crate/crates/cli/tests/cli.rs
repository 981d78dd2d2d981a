use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn otp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_lower_bound(dir: &Path, k: u32, m: u32) -> String {
    let path = dir.join(format!("lb_{k}_{m}.json"));
    let p = path.to_str().unwrap().to_string();
    let o = otp(&["generate", "lowerbound", "--k", &k.to_string(), "--m", &m.to_string(), "--out", &p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

#[test]
fn generate_lower_bound_document() {
    let o = otp(&["generate", "lowerbound", "--k", "3", "--m", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["version"], "otp-1");
    assert_eq!(doc["metric"]["coordinates"][0], "-1");
    assert_eq!(doc["metric"]["coordinates"][1], "1");
    assert_eq!(doc["sites"][0]["capacity"], 3);
    assert_eq!(doc["requests"].as_array().unwrap().len(), 4);
}

#[test]
fn generate_random_is_deterministic() {
    let args =
        ["generate", "random", "--sites", "5", "--requests", "12", "--k", "3", "--capacity-max", "4", "--seed", "9"];
    let a = otp(&args);
    let b = otp(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = otp(&[
        "generate",
        "random",
        "--sites",
        "5",
        "--requests",
        "12",
        "--k",
        "3",
        "--capacity-max",
        "4",
        "--seed",
        "10",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn bad_parameters_are_usage_errors() {
    let o = otp(&["generate", "lowerbound", "--k", "2", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k >= 3"));
    assert_eq!(otp(&["generate", "random", "--sites", "1", "--requests", "3", "--k", "3"]).status.code(), Some(2));
    assert_eq!(otp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(otp(&["run", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn run_reports_costs_and_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_lower_bound(dir.path(), 3, 2);
    let o = otp(&["run", &p, "--policy", "highest", "--with-opt", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "greedy_cost 5\nopt_cost 3\nratio 5/3\n");

    let o = otp(&["run", &p, "--policy", "highest", "--with-opt", "--json", "--exact"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ratio"], "5/3");
    assert_eq!(v["mapping"], serde_json::json!([1, 1, 1, 0]));

    let o = otp(&["run", &p, "--with-opt", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["greedy_cost"], 3.0);
}

#[test]
fn run_on_empty_instance_costs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    fs::write(
        &path,
        r#"{"version":"otp-1","metric":{"kind":"line","coordinates":["0"]},"k":3,"sites":[{"id":0,"point":0,"capacity":1}],"requests":[]}"#,
    )
    .unwrap();
    let o = otp(&["run", path.to_str().unwrap(), "--with-opt"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "greedy_cost 0\nopt_cost 0\nratio undefined\n");
}

#[test]
fn malformed_instance_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"version\": \"otp-1\",\n  \"k\": }").unwrap();
    let o = otp(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn verify_lower_bound_passes() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_lower_bound(dir.path(), 3, 4);
    let o = otp(&["verify", &p, "--policy", "highest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("PASS\n"));

    let o = otp(&["verify", &p, "--policy", "highest", "--json", "--exact", "--detailed"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["ratio"], "65/27");
    assert_eq!(v["lemmas"]["failure_count"], 0);
    assert!(v["lemmas"]["inequalities"].as_array().unwrap().len() > 10);
    let tree = &v["lemmas"]["trees"][0];
    for key in ["tree_id", "root", "on_cost", "opt_cost", "bound_rhs", "pass"] {
        assert!(tree.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn verify_refuses_k_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k2.json");
    let o =
        otp(&["generate", "random", "--sites", "3", "--requests", "3", "--k", "2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let o = otp(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k >= 3"));
}

#[test]
fn verify_campaign() {
    let o = otp(&[
        "verify",
        "--random-campaign",
        "20",
        "--max-sites",
        "12",
        "--max-requests",
        "30",
        "--threads",
        "2",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["instances"], 60);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["rows"][59]["instance_id"], 59);
    assert_eq!(v["rows"][1]["kind"], "plane");
}

#[test]
fn experiment_lower_bound_csv() {
    let o = otp(&["experiment", "--family", "lowerbound", "--k", "3", "--m-range", "1..6", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["instance_id", "k", "m_or_seed", "greedy_cost", "opt_cost", "ratio", "bound", "lemma_pass"]
    );
    let ratios: Vec<String> = r.records().map(|rec| rec.unwrap()[5].to_string()).collect();
    assert_eq!(ratios, ["1", "5/3", "19/9", "65/27", "211/81", "665/243"]);

    let o = otp(&["experiment", "--family", "lowerbound", "--k", "4", "--m-range", "3", "--exact"]);
    let text = stdout(&o);
    assert_eq!(text.lines().nth(1).unwrap(), "0,4,3,28,16,7/4,2,true");
}

#[test]
fn experiment_ratio_grows_with_m() {
    let o = otp(&["experiment", "--family", "lowerbound", "--k", "5", "--m-range", "1..5"]);
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let ratios: Vec<f64> = r.records().map(|rec| rec.unwrap()[5].parse().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[0] <= w[1]), "{ratios:?}");
}

#[test]
fn experiment_random_family() {
    let args =
        ["experiment", "--family", "random", "--count", "4", "--max-sites", "8", "--max-requests", "20", "--seed", "3"];
    let a = otp(&args);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 13);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "3"]);
    assert_eq!(otp(&threaded).stdout, a.stdout);
}

#[test]
fn experiment_bad_range_is_usage_error() {
    assert_eq!(otp(&["experiment", "--family", "lowerbound", "--k", "3", "--m-range", "5..2"]).status.code(), Some(2));
    assert_eq!(otp(&["experiment", "--family", "lowerbound", "--m-range", "1..2"]).status.code(), Some(2));
}
