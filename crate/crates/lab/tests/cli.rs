#![allow(clippy::approx_constant)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use pursuit_lab::output::{read_numeric_csv, Cell, Table};
use pursuit_lab::{main_with_args, Command as Sub, RunConfig};
use serde_json::Value;

fn bin(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pursuit-lab"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn pursuit-lab")
}

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("pursuit-lab").chain(args.iter().copied()))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

#[test]
fn equilibrium_json_matches_closed_form() {
    let out = bin(&["equilibrium", "--n", "0.5", "--a", "1", "--format", "json"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["rho_star"].as_f64().unwrap() - 0.8660254).abs() < 1e-7);
    assert!((doc["zeta_star"].as_f64().unwrap() - std::f64::consts::FRAC_PI_3).abs() < 1e-7);
    assert_eq!(doc["class"], "stable-spiral");
    let eig = doc["eigenvalues"].as_array().unwrap();
    let mut ims: Vec<f64> = eig.iter().map(|z| z["im"].as_f64().unwrap()).collect();
    ims.sort_by(f64::total_cmp);
    for z in eig {
        assert!((z["re"].as_f64().unwrap() + 0.2886751).abs() < 1e-7);
    }
    assert!((ims[0] + 0.9574271).abs() < 1e-7 && (ims[1] - 0.9574271).abs() < 1e-7);
}

#[test]
fn equilibrium_csv_has_one_row() {
    let out = bin(&["equilibrium", "--n", "0.9"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("n,a,rho_star,zeta_star,class,"));
    assert!(lines[1].contains(",stable-node,"));
}

#[test]
fn circular_dynsys_ends_at_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dyn.csv");
    let code = run(&[
        "dynsys", "--n", "0.5", "--a", "1", "--b", "1", "--rho0", "1", "--zeta0", "1.5708", "--t1", "31.416", "-o",
        path_str(&out),
    ]);
    assert_eq!(code, 0);
    let (header, rows) = read_numeric_csv(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(header, ["t", "rho", "zeta", "phi"]);
    let last = rows.last().unwrap();
    assert_eq!(last[0], Some(31.416));
    assert!((last[1].unwrap() - 0.8660254).abs() < 1e-3);
    assert!((last[2].unwrap() - std::f64::consts::FRAC_PI_3).abs() < 1e-3);
    assert!(rows.iter().all(|r| r[3].is_none()), "phi column is empty for the circle");
}

#[test]
fn elliptical_dynsys_fills_phi() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dyn.csv");
    assert_eq!(run(&["dynsys", "--t1", "5", "-o", path_str(&out)]), 0);
    let (_, rows) = read_numeric_csv(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(rows[0][3], Some(std::f64::consts::FRAC_PI_2));
    assert!(rows.iter().all(|r| r[3].is_some()));
}

#[test]
fn simulate_writes_schema_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, svg) = (dir.path().join("sim.csv"), dir.path().join("sim.svg"));
    let code = run(&[
        "simulate", "--n", "0.5", "--a", "1", "--b", "0.5", "--param", "standard", "--t1", "6.2832", "-o",
        path_str(&csv), "--svg", path_str(&svg),
    ]);
    assert_eq!(code, 0);
    let (header, rows) = read_numeric_csv(&fs::read(&csv).unwrap()).unwrap();
    assert_eq!(header, ["param", "evader_x", "evader_y", "pursuer_x", "pursuer_y", "rho", "lambda"]);
    assert_eq!(rows[0][..5], [Some(0.0), Some(1.0), Some(0.0), Some(0.0), Some(0.0)]);
    assert_eq!(rows.last().unwrap()[0], Some(6.2832));
    assert!(rows.iter().all(|r| (r[5].unwrap() - r[6].unwrap() * 0.5 * speed(r[0].unwrap())).abs() < 1e-12));
    let plot = fs::read_to_string(&svg).unwrap();
    assert!(plot.starts_with("<svg") && plot.matches("<polyline").count() == 2);
    // Only the two requested files remain: temporaries were renamed away.
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn capture_is_reported_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cap.json");
    let code = run(&["simulate", "--n", "2", "--a", "1", "--b", "1", "--param", "circle", "--p0", "0.5,0", "-o", path_str(&out)]);
    assert_eq!(code, 0);
    let doc = read_json(&out);
    let param = doc["capture"]["param"].as_f64().expect("capture record");
    assert!(param > 0.0 && param < std::f64::consts::TAU);
    let last = doc["rows"].as_array().unwrap().last().unwrap();
    assert!(last["rho"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn compare_params_passes_and_ignores_thread_count() {
    let one = bin(&["compare-params"], &[("PURSUIT_LAB_THREADS", "1")]);
    let three = bin(&["compare-params"], &[("PURSUIT_LAB_THREADS", "3")]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
    let (header, rows) = read_numeric_csv(&one.stdout).unwrap();
    assert_eq!(header.len(), 10);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[9].unwrap() <= 1e-3));
    let junk = bin(&["compare-params"], &[("PURSUIT_LAB_THREADS", "zero")]);
    assert_eq!(junk.stdout, one.stdout);
    assert!(String::from_utf8_lossy(&junk.stderr).contains("PURSUIT_LAB_THREADS"));
}

#[test]
fn limit_cycle_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lc.json");
    assert_eq!(run(&["limit-cycle", "-o", path_str(&out)]), 0);
    let doc = read_json(&out);
    assert_eq!(doc["converged"], true);
    assert_eq!(doc["gaps_non_increasing"], true);
    let rows = doc["rows"].as_array().unwrap();
    assert!(rows[0]["gap"].is_null());
    assert!(rows.len() >= 3);
}

#[test]
fn circular_limit_cycle_is_the_equilibrium() {
    let out = bin(&["limit-cycle", "--b", "1", "--format", "json"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["cycle_point"]["rho"].as_f64().unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-3);
    assert!((doc["cycle_point"]["zeta_wrapped"].as_f64().unwrap() - std::f64::consts::FRAC_PI_3).abs() < 1e-3);
}

#[test]
fn zeta_ode_runs_one_revolution() {
    let out = bin(&["zeta-ode"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_numeric_csv(&out.stdout).unwrap();
    assert_eq!(header, ["theta", "zeta", "zeta_prime"]);
    let (first, last) = (rows[0][0].unwrap(), rows.last().unwrap()[0].unwrap());
    assert!((last - first - std::f64::consts::TAU).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    // Validation failures.
    assert_eq!(bin(&["simulate", "--param", "circle"], &[]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "--bogus"], &[]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "--step", "1e-3", "--tol", "1e-9"], &[]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "--n", "-1"], &[]).status.code(), Some(1));
    assert_eq!(bin(&["equilibrium", "--n", "1.2"], &[]).status.code(), Some(1));
    assert_eq!(bin(&["equilibrium", "--svg", "x.svg"], &[]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "-o", "/nonexistent-dir/out.csv"], &[]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "--p0", "1,0", "--param", "standard"], &[]).status.code(), Some(1));
    // Numerical failure: the second-order equation is singular at zeta = 0.
    assert_eq!(bin(&["zeta-ode", "--zeta0", "0"], &[]).status.code(), Some(2));
    // Help is not an error.
    assert_eq!(bin(&["--help"], &[]).status.code(), Some(0));
}

/// Evader speed on the standard ellipse with a = 1, b = 0.5.
fn speed(t: f64) -> f64 {
    t.sin().hypot(0.5 * t.cos())
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.json");
    fs::write(&path, body).unwrap();
    path
}

fn resolve(args: &[&str]) -> pursuit_lab::Result<RunConfig> {
    use clap::Parser;
    let cli = pursuit_lab::Cli::try_parse_from(std::iter::once("pursuit-lab").chain(args.iter().copied())).unwrap();
    let (command, opts) = cli.command.split();
    RunConfig::resolve(command, opts)
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"command": "simulate", "n": 0.6, "b": 0.7, "p0": [0.1, -0.2], "format": "json"}"#);
    let file_only = resolve(&["simulate", "--config", path_str(&cfg)]).unwrap();
    assert_eq!((file_only.n, file_only.b, file_only.p0), (0.6, 0.7, [0.1, -0.2]));
    assert_eq!(file_only.format, pursuit_lab::Format::Json);
    assert_eq!(file_only.a, 1.0);

    let both = resolve(&["simulate", "--config", path_str(&cfg), "--n", "0.8", "--format", "csv"]).unwrap();
    assert_eq!((both.n, both.b), (0.8, 0.7));
    assert_eq!(both.format, pursuit_lab::Format::Csv);

    assert!(resolve(&["dynsys", "--config", path_str(&cfg)]).is_err());
}

#[test]
fn bad_config_files_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write_config(dir.path(), r#"{"speed": 0.5}"#);
    assert_eq!(run(&["simulate", "--config", path_str(&typo)]), 1);
    assert_eq!(run(&["simulate", "--config", path_str(&dir.path().join("missing.json"))]), 1);
}

#[test]
fn defaults_are_the_reference_experiment() {
    let cfg = RunConfig::defaults(Sub::Simulate);
    assert_eq!((cfg.n, cfg.a, cfg.b, cfg.p0), (0.5, 1.0, 0.5, [0.0, 0.0]));
    assert_eq!((cfg.rho0, cfg.zeta0, cfg.phi0), (1.0, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2));
    assert_eq!(cfg.time_span(), (0.0, 10.0 * std::f64::consts::PI));
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, ext) in [("simulate", "csv"), ("dynsys", "json"), ("limit-cycle", "csv")] {
        let path = dir.path().join(format!("out.{ext}"));
        assert_eq!(run(&[cmd, "-o", path_str(&path)]), 0);
        let first = fs::read(&path).unwrap();
        assert_eq!(run(&[cmd, "-o", path_str(&path)]), 0);
        assert_eq!(first, fs::read(&path).unwrap(), "{cmd}");
    }
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..40)) {
        let mut table = Table::new(&["x", "y"]);
        for pair in values.chunks(2) {
            table.push(vec![Cell::Num(pair[0]), pair.get(1).copied().into()]);
        }
        let (_, rows) = read_numeric_csv(&table.to_csv().unwrap()).unwrap();
        let back: Vec<f64> = rows.iter().flatten().flatten().copied().collect();
        prop_assert_eq!(values.len(), back.len());
        for (a, b) in values.iter().zip(&back) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
