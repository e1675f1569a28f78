use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::Parser;
use nspmarket_cli::{run, Cli};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

/// Runs the command line `args` with `--out dir` and returns stdout.
fn exec(dir: &Path, args: &[&str]) -> String {
    let mut argv = vec!["nspmarket", "--out", dir.to_str().unwrap()];
    argv.extend_from_slice(args);
    let cli = Cli::try_parse_from(argv).unwrap();
    let mut out = Vec::new();
    run(&cli, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

fn field(summary: &str, key: &str) -> String {
    summary
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no `{key}` in {summary}"))
        .to_string()
}

fn num(summary: &str, key: &str) -> f64 {
    field(summary, key).parse().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect()
}

fn analysis(path: &Path, section: &str, item: &str) -> String {
    rows(path)
        .into_iter()
        .find(|r| r[0] == section && r[1] == item)
        .unwrap_or_else(|| panic!("no {section}/{item}"))[2]
        .clone()
}

#[test]
fn simulate_split_monopoly_reaches_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let s = exec(dir.path(), &["simulate", scenario("split_monopoly.json").to_str().unwrap()]);
    assert_eq!(field(&s, "converged"), "true");
    assert!((num(&s, "lambda2") - 0.2549208).abs() < 1e-7);
    let trace = rows(&dir.path().join("split_monopoly_simulate.csv"));
    assert_eq!(trace[0], ["0", "0"]);
    assert!((trace.last().unwrap()[1].parse::<f64>().unwrap() - 0.2549208).abs() < 1e-7);
}

#[test]
fn zero_price_trace_has_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    exec(dir.path(), &["simulate", scenario("zero_price.json").to_str().unwrap()]);
    let text = std::fs::read_to_string(dir.path().join("zero_price_simulate.csv")).unwrap();
    assert_eq!(text, "t,lambda2\n0,0\n1,1\n");
}

#[test]
fn duopoly_trace_matches_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("duopoly.json");
    let s = exec(dir.path(), &["--tol", "1e-13", "simulate", path.to_str().unwrap()]);
    exec(dir.path(), &["analyze", path.to_str().unwrap()]);
    let a = dir.path().join("duopoly_analyze.csv");
    let l1: f64 = analysis(&a, "equilibrium", "lambda1").parse().unwrap();
    let l2: f64 = analysis(&a, "equilibrium", "lambda2").parse().unwrap();
    assert!((num(&s, "lambda1") - l1).abs() < 1e-10);
    assert!((num(&s, "lambda2") - l2).abs() < 1e-10);
    assert_eq!(rows(&dir.path().join("duopoly_simulate.csv"))[0].len(), 3);
}

#[test]
fn analyze_reports_conditions_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    exec(dir.path(), &["analyze", scenario("split_monopoly.json").to_str().unwrap(), "--curve-points", "21"]);
    let a = dir.path().join("split_monopoly_analyze.csv");
    let share: f64 = analysis(&a, "optimum", "share").parse().unwrap();
    assert!(share > 0.382 && share <= 0.5);
    assert_eq!(analysis(&a, "bounds", "optimum_within"), "true");
    assert_eq!(analysis(&a, "convergence", "holds"), "true");
    assert_eq!(rows(&dir.path().join("split_monopoly_analyze_curve.csv")).len(), 21);

    exec(dir.path(), &["analyze", scenario("duopoly.json").to_str().unwrap()]);
    let d = dir.path().join("duopoly_analyze.csv");
    assert_eq!(analysis(&d, "convergence_duopoly", "holds"), "false");
    let lhs: f64 = analysis(&d, "convergence_duopoly", "lhs").parse().unwrap();
    assert!((lhs - 1.684).abs() < 0.01);
}

#[test]
fn constant_qos_optimum_is_half_the_top_price() {
    let dir = tempfile::tempdir().unwrap();
    let s = exec(dir.path(), &["analyze", scenario("constant_qos.json").to_str().unwrap()]);
    assert_eq!(num(&s, "price"), 2.0 * 1.5 / 2.0);
    let a = dir.path().join("constant_qos_analyze.csv");
    assert_eq!(analysis(&a, "convergence_partial", "holds"), "true");
}

#[test]
fn compete_is_start_independent() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("duopoly.json");
    let a = exec(dir.path(), &["compete", path.to_str().unwrap()]);
    let b = exec(dir.path(), &["compete", path.to_str().unwrap(), "--start", "0,0.5"]);
    for k in ["lambda1", "lambda2"] {
        assert!((num(&a, k) - num(&b, k)).abs() < 1e-8);
        assert!(num(&a, k) > 0.0 && num(&a, k) < 0.5);
    }
    assert_eq!(field(&a, "supermodular"), "true");
    let traj = rows(&dir.path().join("duopoly_compete.csv"));
    assert_eq!(traj[0][..3], ["0", "0", "0.5"]);
    assert_eq!(traj.len(), field(&b, "rounds").parse::<usize>().unwrap() + 1);
}

#[test]
fn select_maps_have_the_expected_regions() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ["--k-first", "0:0.5:0.01"];
    let mono = scenario("selection_monopoly.json");
    let duo = scenario("selection_duopoly.json");
    exec(dir.path(), &[&["select", mono.to_str().unwrap()], &grid[..]].concat());
    exec(dir.path(), &[&["select", duo.to_str().unwrap()], &grid[..]].concat());
    let m = rows(&dir.path().join("selection_monopoly_select.csv"));
    let d = rows(&dir.path().join("selection_duopoly_select.csv"));
    assert_eq!(m.len(), 51 * 51);
    for choice in ["split", "common", "not-enter"] {
        assert!(m.iter().any(|r| r[2] == choice), "{choice} missing");
    }
    let entry = |rs: &[Vec<String>]| rs.iter().filter(|r| r[2] != "not-enter").count();
    assert!(entry(&d) < entry(&m));
}

#[test]
fn costless_single_technology_is_chosen() {
    let dir = tempfile::tempdir().unwrap();
    let s = exec(dir.path(), &["select", scenario("split_monopoly.json").to_str().unwrap()]);
    assert!(s.trim_end().ends_with("chosen=split"), "{s}");
}

#[test]
fn fit_qos_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let s = exec(dir.path(), &["fit-qos", scenario("data/tabulated_qos.csv").to_str().unwrap()]);
    assert!((num(&s, "c") - 0.088).abs() < 1e-9);
    assert_eq!(rows(&dir.path().join("tabulated_qos_fit-qos.csv")).len(), 21);
}

fn binary(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_nspmarket"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"distribution\": { \"kind\": \"uniform\", \"beta\": 1.0 },\n  \"technologies\": 3\n}\n").unwrap();
    let (code, err) = binary(dir.path(), &["simulate", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.json") && err.contains("line 3"), "{err}");

    let (code, _) = binary(dir.path(), &["simulate", "/nonexistent.json"]);
    assert_eq!(code, 2);

    let sel = scenario("selection_monopoly.json");
    let (code, err) = binary(dir.path(), &["simulate", sel.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("dynamics"), "{err}");
    let (code, err) = binary(dir.path(), &["compete", scenario("duopoly.json").to_str().unwrap(), "--tech", "nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("nope"));

    let missing = dir.path().join("missing_table.json");
    std::fs::write(
        &missing,
        r#"{"distribution": {"kind": "uniform", "beta": 1}, "technologies": [{"name": "t", "qos": {"kind": "tabulated", "file": "none.csv"}}]}"#,
    )
    .unwrap();
    let (code, err) = binary(dir.path(), &["analyze", missing.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("none.csv"), "{err}");

    let (code, _) = binary(dir.path(), &["--max-iter", "1", "compete", scenario("duopoly.json").to_str().unwrap()]);
    assert_eq!(code, 3);
    assert_eq!(rows(&dir.path().join("duopoly_compete.csv")).len(), 2);
}

#[test]
fn unconverged_simulation_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = binary(dir.path(), &["--max-iter", "2", "simulate", scenario("split_monopoly.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(rows(&dir.path().join("split_monopoly_simulate.csv")).len(), 3);
}
