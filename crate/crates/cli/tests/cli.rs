use std::process::{Command, Output};

use serde_json::Value;

fn pdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn solve_planted_split_instance() {
    let o = pdp(&["solve", "--n", "11", "--m", "3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["report"]["status"], "solved");
    assert_eq!(v["report"]["nvars"], 20);
    assert_eq!(v["equations"], 22);
    assert!(!v["decompositions"].as_array().unwrap().is_empty());
}

#[test]
fn instance_file_round_trip_and_backends_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.txt");
    let p = path.to_str().unwrap();
    assert_eq!(pdp(&["gen", "--n", "9", "--m", "2", "--seed", "3", "--out", p]).status.code(), Some(0));
    let solutions = |backend: &str| {
        let o = pdp(&["solve", "--instance", p, "--variant", "classic", "--backend", backend]);
        assert_eq!(o.status.code(), Some(0), "{backend}");
        json(&o)["report"]["solution_bits"].clone()
    };
    let gb = solutions("groebner");
    assert_eq!(gb, solutions("sat"));
    assert_eq!(gb, solutions("linearize"));
}

#[test]
fn oracle_lists_the_plant() {
    let o = pdp(&["oracle", "--n", "9", "--m", "3", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["count"].as_u64().unwrap() >= 1);
}

#[test]
fn timeout_exit_code() {
    let o = pdp(&["solve", "--n", "13", "--m", "3", "--timeout", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["report"]["status"], "timeout");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(pdp(&["solve", "--no-such-flag"]).status.code(), Some(64));
    assert_eq!(pdp(&["cost", "--n", "100", "--model", "s9"]).status.code(), Some(64));
    let o = pdp(&["--json", "solve", "--n", "21", "--m", "7", "--variant", "split2"]);
    assert_eq!(o.status.code(), Some(64));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 64);
    assert!(err["error"].as_str().unwrap().contains("m = 7"), "{err}");
}

#[test]
fn cost_models() {
    let o = pdp(&["--json", "cost", "--n", "1200", "--m", "5", "--model", "s4"]);
    let v = json(&o);
    let total = v["rows"][0]["approx_total_log2"].as_f64().unwrap();
    assert!((total - 550.0).abs() <= 3.0, "{total}");
    let v = json(&pdp(&["--json", "cost", "--n", "550", "--model", "s5"]));
    assert_eq!(v["crossover_n"], 457);
    assert!((v["rows"][0]["approx_total_log2"].as_f64().unwrap() - 250.0).abs() <= 3.0);
}

#[test]
fn cost_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cost.csv");
    let o = pdp(&["cost", "--n", "100-102", "--model", "s5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("100,5,s5,4,400,"));
}

#[test]
fn exports() {
    let cnf = stdout(&pdp(&["export-cnf", "--n", "9", "--m", "3", "--seed", "5"]));
    let header = cnf.lines().find(|l| l.starts_with("p cnf ")).unwrap();
    let fields: Vec<usize> = header[6..].split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert_eq!(cnf.lines().filter(|l| !l.starts_with('c') && !l.starts_with('p')).count(), fields[1]);
    assert!(cnf.lines().next().unwrap().starts_with("c universe 18"));
    let wrong_m = pdp(&["export-anf", "--n", "9", "--m", "3", "--seed", "5", "--variant", "full-split"]);
    assert_eq!(wrong_m.status.code(), Some(64));
    let anf = stdout(&pdp(&["export-anf", "--n", "10", "--m", "5", "--seed", "5", "--variant", "full-split"]));
    assert_eq!(anf.lines().filter(|l| l.starts_with("#group")).count(), 4);
}

#[test]
fn firstfall_certificates() {
    let v = json(&pdp(&["--json", "firstfall", "--n", "13", "--m", "3", "--nprime", "4", "--seed", "3"]));
    assert_eq!(v["bound"], 4);
    assert_eq!(v["certificates"].as_array().unwrap().len(), 2);
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("grid");
    let o = pdp(&[
        "bench",
        "--n",
        "7-8",
        "--m",
        "2",
        "--variant",
        "classic",
        "--backend",
        "groebner,sat",
        "--trials",
        "2",
        "--jobs",
        "2",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], "1");
        assert_eq!((f[9], f[10]), ("2", "2"), "{line}");
    }
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("grid.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["rows"][0]["n"], 7);
    assert_eq!(v["rows"][1]["backend"], "sat");
}
