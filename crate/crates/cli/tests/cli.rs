use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nash-ptas"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

const DOMINANT: &str = r#"{"n":2,"u":[{"u0":[0,0],"u1":[1,1]},{"u0":[0,0],"u1":[1,1]}]}"#;

#[test]
fn verify_dominant_strategy_profile() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "g.json", DOMINANT);
    let profile = write(&dir, "p.json", r#"{"q":[1,1]}"#);
    let out = run(&["verify", "--game", s(&game), "--profile", s(&profile), "--epsilon", "0.1"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["max_regret"], 0.0);
    assert_eq!(v["within_epsilon"], true);

    let bad = write(&dir, "q.json", r#"{"q":[0,1]}"#);
    let out = run(&["verify", "--game", s(&game), "--profile", s(&bad), "--epsilon", "0.1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["max_regret"], 1.0);
}

#[test]
fn anon_solve_output_reverifies() {
    let dir = TempDir::new().unwrap();
    let game = dir.path().join("ac.json");
    assert_eq!(code(&run(&["gen", "anti-coordination", "--n", "3", "-o", s(&game)])), 0);
    let sol = dir.path().join("sol.json");
    let out = run(&["anon", "solve", "--epsilon", "0.2", "--k", "2", "--d", "2", s(&game), "-o", s(&sol)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    for key in ["profile", "max_regret", "guess_used", "wall_time"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let reported = v["max_regret"].as_f64().unwrap();
    assert!(reported <= 0.2);
    let eps = format!("{}", reported + 1e-9);
    let out = run(&["verify", "--game", s(&game), "--profile", s(&sol), "--epsilon", &eps]);
    assert_eq!(code(&out), 0);
    assert!((stdout_json(&out)["max_regret"].as_f64().unwrap() - reported).abs() <= 1e-9);
}

#[test]
fn anon_solve_on_larger_random_game() {
    let dir = TempDir::new().unwrap();
    let game = dir.path().join("g.json");
    let out = run(&["gen", "random", "--kind", "anonymous", "--n", "4", "--seed", "3", "-o", s(&game)]);
    assert_eq!(code(&out), 0);
    let out = run(&["anon", "solve", "--epsilon", "0.2", "--k", "4", "--d", "2", s(&game)]);
    match code(&out) {
        0 => assert!(stdout_json(&out)["max_regret"].as_f64().unwrap() <= 0.2),
        1 => assert!(out.stdout.is_empty()),
        c => panic!("unexpected exit {c}"),
    }
}

#[test]
fn anon_oracle_lists_grid_equilibria() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "g.json", DOMINANT);
    let out = run(&["anon", "oracle", s(&game), "--grid", "4", "--epsilon", "0.1"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["profiles"].as_array().unwrap().len(), 1);
    let out = run(&["anon", "oracle", s(&game), "--grid", "400", "--epsilon", "0.1"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn typed_game_is_rejected_by_moment_search() {
    let dir = TempDir::new().unwrap();
    let game = dir.path().join("gp.json");
    let out = run(&["gen", "gp", "--k", "2", "--delta", "0.05", "--p", "0.4,0.6", "-o", s(&game)]);
    assert_eq!(code(&out), 0);
    let out = run(&["anon", "solve", "--epsilon", "0.2", "--k", "2", "--d", "2", s(&game)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn cover_build_then_check() {
    let dir = TempDir::new().unwrap();
    let cover = dir.path().join("c.json");
    let out = run(&["cover", "build", "--n", "2", "--k", "2", "--d", "2", "-o", s(&cover)]);
    assert_eq!(code(&out), 0);
    let out = run(&["cover", "check", s(&cover), "--probs", "0.5", "0.5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["tv"], 0.0);

    let out = run(&["cover", "check", s(&cover), "--probs", "0.5"]);
    assert_eq!(code(&out), 2);
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);
}

#[test]
fn cover_build_is_byte_identical() {
    let a = run(&["cover", "build", "--n", "3", "--k", "2", "--d", "2"]);
    let b = run(&["cover", "build", "--n", "3", "--k", "2", "--d", "2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn pbd_subcommands() {
    let out = run(&["pbd", "pmf", "--probs", "0.5,0.5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["pmf"], serde_json::json!([0.25, 0.5, 0.25]));

    let out = run(&["pbd", "tv", "--a", "0.1,0.4", "--b", "0.2,0.3"]);
    let tv = stdout_json(&out)["tv"].as_f64().unwrap();
    // pmfs (0.54, 0.42, 0.04) and (0.56, 0.38, 0.06).
    assert!((tv - 0.04).abs() < 1e-12);

    let out = run(&["pbd", "moments", "--probs", "0.25,0.75", "--d", "2"]);
    let v = stdout_json(&out);
    assert_eq!(v["power_sums"], serde_json::json!([1.0, 0.625]));

    let out = run(&["pbd", "roos", "--probs", "0.2,0.3,0.4", "--order", "3"]);
    let v = stdout_json(&out);
    let exact = [0.336, 0.452, 0.188, 0.024];
    for (got, want) in v["values"].as_array().unwrap().iter().zip(exact) {
        assert!((got.as_f64().unwrap() - want).abs() < 1e-12);
    }

    assert_eq!(code(&run(&["pbd", "pmf", "--probs", "1.5"])), 2);
}

#[test]
fn generators_match_schemas() {
    let out = run(&["gen", "gs", "--ell", "4"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["n"], 6);
    assert_eq!(v["R"].as_array().unwrap().len(), 6);

    let out = run(&["gen", "random", "--kind", "sparse", "--n", "8", "--k", "2", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed: 5"));
    let again = run(&["gen", "random", "--kind", "sparse", "--n", "8", "--k", "2", "--seed", "5"]);
    assert_eq!(out.stdout, again.stdout);

    let out = run(&["gen", "random", "--kind", "anonymous", "--n", "3"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed: 0"));
    assert_eq!(stdout_json(&out)["u"].as_array().unwrap().len(), 3);

    assert_eq!(code(&run(&["gen", "gs", "--ell", "3"])), 2);
}

#[test]
fn bimatrix_commands() {
    let dir = TempDir::new().unwrap();
    let game = dir.path().join("g.json");
    assert_eq!(code(&run(&["gen", "random", "--kind", "sparse", "--n", "32", "--k", "2", "-o", s(&game)])), 0);
    let out = run(&["bimatrix", "solve-sparse", s(&game)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let bound = v["regret_bound"].as_f64().unwrap();
    for r in v["regret"].as_array().unwrap() {
        assert!(r.as_f64().unwrap() <= bound);
    }

    let pennies = dir.path().join("p.json");
    assert_eq!(code(&run(&["gen", "pennies", "--n", "2", "-o", s(&pennies)])), 0);
    let sol = dir.path().join("s.json");
    let out = run(&["bimatrix", "sample", s(&pennies), "--epsilon", "0.5", "--seed", "7", "-o", s(&sol)]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed: 7"));
    let v: Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(v["seed"], 7);
    let out = run(&["verify", "--game", s(&pennies), "--profile", s(&sol), "--epsilon", "0.5"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn sampler_without_success_exits_one() {
    let dir = TempDir::new().unwrap();
    // The first row is strictly dominated, so any sample that uses it fails.
    let game = write(&dir, "d.json", r#"{"n":2,"R":[[-1,-1],[1,1]],"C":[[0,0],[0,0]]}"#);
    let out = run(&["bimatrix", "sample", s(&game), "--epsilon", "0.5", "--trials", "1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["successes"], 0);
}

#[test]
fn tv_sweep_stays_below_bound() {
    let out = run(&["sweep", "tv", "--n-max", "5", "--grid", "20"]);
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(&out);
    let max_col = header.iter().position(|h| h == "max_tv").unwrap();
    let bound_col = header.iter().position(|h| h == "roos_bound").unwrap();
    assert_eq!(rows.len(), 3 * 5 * 2);
    for row in &rows {
        let tv: f64 = row[max_col].parse().unwrap();
        let bound: f64 = row[bound_col].parse().unwrap();
        assert!(tv <= bound);
        assert!((0.0..=1.0).contains(&tv));
    }
}

#[test]
fn sampler_sweep_rates_are_probabilities() {
    let dir = TempDir::new().unwrap();
    let pennies = dir.path().join("p.json");
    assert_eq!(code(&run(&["gen", "pennies", "--n", "2", "-o", s(&pennies)])), 0);
    let args = ["sweep", "sampler", s(&pennies), "--epsilon", "0.4,0.6", "--trials", "200"];
    let out = run(&args);
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(&out);
    let col = header.iter().position(|h| h == "success_rate").unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let rate: f64 = row[col].parse().unwrap();
        assert!((0.0..=1.0).contains(&rate));
    }
    assert_eq!(run(&args).stdout, out.stdout);
}

#[test]
fn empty_sweeps_are_header_only() {
    let out = run(&["sweep", "tv", "--n-max", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);

    let dir = TempDir::new().unwrap();
    let pennies = dir.path().join("p.json");
    assert_eq!(code(&run(&["gen", "pennies", "--n", "2", "-o", s(&pennies)])), 0);
    let out = run(&["sweep", "sampler", s(&pennies), "--epsilon"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "epsilon,seed,n,t,trials,successes,success_rate,first_success_trial"
    );
}

#[test]
fn input_errors_exit_two_with_one_line() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{not json");
    let game = write(&dir, "g.json", DOMINANT);
    let long = write(&dir, "p.json", r#"{"q":[1,1,1]}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["anon", "solve", "--bogus"],
        vec!["anon", "solve", s(&bad), "--epsilon", "0.2"],
        vec!["verify", "--game", s(&game), "--profile", s(&long)],
        vec!["verify", "--game", "missing.json", "--profile", s(&long)],
        vec!["anon", "solve", s(&game), "--epsilon", "1.5"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1, "{args:?}");
    }
}

#[test]
fn resource_errors_exit_three() {
    let out = run(&["sweep", "tv", "--n-max", "12", "--grid", "60"]);
    assert_eq!(code(&out), 3);
}
