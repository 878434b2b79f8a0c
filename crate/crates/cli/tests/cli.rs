use std::path::Path;
use std::process::{Command, Output};

use sausage_core::experiments::{parse_csv, CSV_HEADER};

fn sausage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sausage"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SMALL_CAP: &[&str] = &["cap", "--seed", "3", "--n-walkers", "2000"];

#[test]
fn cap_to_stdout_has_the_fixed_header() {
    let o = sausage(SMALL_CAP);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.kind == "cap" && r.seed == 3 && r.wall_time_s == 0.0));
}

#[test]
fn missing_seed_is_a_config_error() {
    let o = sausage(&["cap", "--n-walkers", "2000"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn invalid_config_values_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "delta = 1.5\nt_grid = []\n").unwrap();
    let o = sausage(&["lln", "--seed", "1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("delta") && err.contains("t_grid"), "{err}");

    std::fs::write(&cfg, "no_such_field = 1\n").unwrap();
    let o = sausage(&["lln", "--seed", "1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unreadable_config_and_unwritable_output_exit_with_3() {
    let o = sausage(&["cap", "--seed", "1", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(code(&o), 3);
    let mut args = SMALL_CAP.to_vec();
    args.extend(["--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(code(&sausage(&args)), 3);
}

#[test]
fn exhausted_walkers_exit_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    std::fs::write(&cfg, "[wos]\nmax_steps = 2\n").unwrap();
    let out = dir.path().join("cap.csv");
    let o = sausage(&[
        "cap",
        "--seed",
        "1",
        "--n-walkers",
        "2000",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    let rows = parse_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(rows.iter().any(|r| r.is_invalid()));
}

#[test]
fn out_file_gets_a_meta_sidecar_and_json_works() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d0.json");
    let o = sausage(&[
        "d0",
        "--seed",
        "5",
        "--t",
        "10,100",
        "--n-paths",
        "200",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(rows.as_array().is_some_and(|a| a.len() == 8));
    let meta = Path::new(dir.path()).join("d0.json.meta.json");
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(meta).unwrap()).unwrap();
    assert_eq!(meta["config"]["seed"], 5);
    assert_eq!(meta["valid"], true);
}

#[test]
fn print_config_shows_the_effective_settings() {
    let o = sausage(&["pair", "--seed", "9", "--print-config", "--delta", "0.05"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("kind = \"pair\""), "{text}");
    assert!(text.contains("delta = 0.05"));
    assert!(text.contains("z_norm = 40"));
}

#[test]
fn output_does_not_depend_on_the_worker_count() {
    let run = |w: &str| {
        let o = sausage(&["lln", "--seed", "11", "--t", "20", "--n-paths", "2", "--n-walkers", "5000", "--workers", w]);
        assert_eq!(code(&o), 0);
        o.stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("16"));
}
