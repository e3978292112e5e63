//! End-to-end tests of the tv2d binary: frozen values through the JSON
//! interface, byte-identical determinism, config round-trips, and exit
//! codes.

use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn tv2d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tv2d"))
        .args(args)
        .output()
        .expect("binary must launch")
}

fn run_json(args: &[&str]) -> Value {
    let out = tv2d(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout must be valid JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tv2d-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn f(v: &Value, path: &[&str]) -> f64 {
    let mut cur = v;
    for p in path {
        cur = &cur[p];
    }
    cur.as_f64().unwrap_or_else(|| panic!("missing float at {path:?}"))
}

#[test]
fn params_frozen_closed_forms() {
    let v = run_json(&["params", "--nu", "0.55", "--v", "2"]);
    assert_eq!(v["version"].as_str().unwrap(), env!("CARGO_PKG_VERSION"));
    assert_eq!(v["command"].as_str().unwrap(), "params");
    assert_eq!(f(&v, &["config", "nu"]), 0.55);
    let eff = &v["results"]["effective"];
    assert!((f(eff, &["q"]) - 1.7278759594743864).abs() < 1e-15);
    assert!((f(eff, &["v_f"]) - 2.7936044933348412).abs() < 1e-13);
    assert!((f(eff, &["g1"]) - 3.9021130325903064).abs() < 1e-13);
    assert!((f(eff, &["g2"]) - 1.9510565162951532).abs() < 1e-13);
    assert!((f(eff, &["gamma"]) - 0.15719548163994768).abs() < 1e-15);
    assert!((f(eff, &["mu_a"]) - 0.69906074431055498).abs() < 1e-13);
    assert_eq!(v["results"]["stability"].as_str().unwrap(), "Stable");
    assert!(v["results"]["micro"].is_null());
}

#[test]
fn params_commensurate_micro_path() {
    let v = run_json(&[
        "params",
        "--nu",
        "0.55",
        "--v",
        "2",
        "--l",
        "25.455844122715714",
    ]);
    let micro = &v["results"]["micro"];
    assert_eq!(micro["m"].as_i64().unwrap(), 9);
    assert_eq!(micro["j"].as_i64().unwrap(), 10);
    assert!((f(micro, &["nu_used"]) - 10.0 / 18.0).abs() < 1e-15);
    assert_eq!(micro["n_sites"].as_i64().unwrap(), 648);
    let q = f(&v, &["results", "effective", "q"]);
    assert!((q - std::f64::consts::PI * 10.0 / 18.0).abs() < 1e-14);
}

#[test]
fn partition_counts_and_fractions() {
    let v = run_json(&["partition", "--nu", "0.6666666666666666", "--l", "8.485281374238571"]);
    let counts: Vec<u64> = v["results"]["counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_u64().unwrap())
        .collect();
    assert_eq!(counts, vec![9, 9, 13, 13, 14, 14]);
    assert_eq!(v["results"]["n_sites"].as_u64().unwrap(), 72);
    assert_eq!(v["results"]["m"].as_i64().unwrap(), 3);
    let total: f64 = v["results"]["regions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| f(r, &["fraction"]))
        .sum();
    assert!((total - f(&v, &["results", "q"]) / std::f64::consts::PI).abs() < 1e-14);
}

#[test]
fn ed_small_torus_frozen_ground_energy() {
    let v = run_json(&["ed", "--n1", "4", "--n2", "2", "--v", "2", "--levels", "4"]);
    assert_eq!(v["results"]["dim"].as_u64().unwrap(), 70);
    assert_eq!(v["results"]["sector"].as_u64().unwrap(), 4);
    let e0 = v["results"]["energies"][0].as_f64().unwrap();
    assert!((e0 - (-6.1420097739919157)).abs() < 1e-9, "{e0}");
    assert!((f(&v, &["results", "ground_energy"]) - e0).abs() < 1e-9);
    assert_eq!(v["results"]["particle_hole"]["pass"].as_bool().unwrap(), true);
    assert!((f(&v, &["results", "lambda"]) - 1.0).abs() < 1e-15);
}

#[test]
fn gap_frozen_value_and_solver_agreement() {
    let v = run_json(&["gap", "--v", "4", "--nu", "0.5", "--grid-n", "64"]);
    let d_fixed = f(&v, &["results", "solution", "delta"]);
    assert!((d_fixed - 0.1899855859384128).abs() < 1e-8, "{d_fixed}");
    assert_eq!(f(&v, &["results", "filling"]), 0.0);
    let v2 = run_json(&[
        "gap", "--v", "4", "--nu", "0.5", "--grid-n", "64", "--method", "bisect",
    ]);
    let d_bisect = f(&v2, &["results", "solution", "delta"]);
    assert!((d_fixed - d_bisect).abs() < 1e-8);
    assert!((d_bisect - 0.1899855859384128).abs() < 1e-10);
}

#[test]
fn free_energy_frozen_value() {
    let v = run_json(&[
        "free-energy",
        "--nu",
        "0.5",
        "--v",
        "2",
        "--boson-m",
        "9",
        "--temperature",
        "0.5",
    ]);
    let gamma = f(&v, &["results", "gamma"]);
    assert!((gamma - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-16);
    assert_eq!(v["results"]["n_modes"].as_u64().unwrap(), 144);
    let fe = f(&v, &["results", "free_energy"]);
    assert!((fe - (-8.7142467852052956)).abs() < 1e-9 * fe.abs(), "{fe}");
    let en = f(&v, &["results", "ground_constant"]);
    assert!((en - (-1.8360730431686416)).abs() < 1e-9 * en.abs(), "{en}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let out1 = scratch("det1.json");
    let out2 = scratch("det2.json");
    for out in [&out1, &out2] {
        let st = tv2d(&[
            "gap",
            "--v",
            "4",
            "--nu",
            "0.5",
            "--grid-n",
            "32",
            "--output",
            out.to_str().unwrap(),
        ])
        .status;
        assert!(st.success());
    }
    let b1 = std::fs::read(&out1).unwrap();
    let b2 = std::fs::read(&out2).unwrap();
    assert!(!b1.is_empty() && b1 == b2, "outputs must match byte for byte");
}

#[test]
fn json_output_feeds_back_as_config() {
    let out1 = scratch("loop1.json");
    let out2 = scratch("loop2.json");
    let st = tv2d(&[
        "gap",
        "--v",
        "4",
        "--nu",
        "0.5",
        "--grid-n",
        "32",
        "--temperature",
        "0.1",
        "--output",
        out1.to_str().unwrap(),
    ])
    .status;
    assert!(st.success());
    let st = tv2d(&[
        "gap",
        "--config",
        out1.to_str().unwrap(),
        "--output",
        out2.to_str().unwrap(),
    ])
    .status;
    assert!(st.success());
    let b1 = std::fs::read(&out1).unwrap();
    let b2 = std::fs::read(&out2).unwrap();
    assert_eq!(b1, b2, "config round-trip must reproduce the run exactly");
}

#[test]
fn csv_output_carries_loadable_config() {
    let csv = scratch("modes.csv");
    let args = [
        "dispersion",
        "--boson-m",
        "3",
        "--nu",
        "0.55",
        "--v",
        "2",
        "--format",
        "csv",
        "--output",
        csv.to_str().unwrap(),
    ];
    assert!(tv2d(&args).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# config: {"), "missing config header");
    assert!(
        text.lines().nth(3).unwrap().starts_with("p_plus,"),
        "missing column header"
    );
    // 8 nonzero grid points on the 3x3 grid
    assert_eq!(text.lines().count(), 4 + 8);
    // the CSV header is a loadable config for any other subcommand
    let v = run_json(&["params", "--config", csv.to_str().unwrap()]);
    assert_eq!(f(&v, &["config", "v"]), 2.0);
    assert_eq!(f(&v, &["config", "nu"]), 0.55);
    assert_eq!(v["config"]["boson_m"].as_u64().unwrap(), 3);
    // but explicit flags still win over the loaded config
    let v = run_json(&["params", "--config", csv.to_str().unwrap(), "--nu", "0.6"]);
    assert_eq!(f(&v, &["config", "nu"]), 0.6);
    // CSV output is deterministic too
    let csv2 = scratch("modes2.csv");
    let mut args2 = args;
    args2[10] = csv2.to_str().unwrap();
    assert!(tv2d(&args2).status.success());
    assert_eq!(
        std::fs::read(&csv).unwrap(),
        std::fs::read(&csv2).unwrap(),
        "CSV runs must match byte for byte"
    );
}

#[test]
fn exit_codes() {
    // domain error in the inputs -> 2
    assert_eq!(tv2d(&["params", "--nu", "0.9"]).status.code(), Some(2));
    // unstable coupling during the computation -> 1
    assert_eq!(
        tv2d(&["dispersion", "--v", "20", "--nu", "0.5"]).status.code(),
        Some(1)
    );
    // unknown flag -> 2 (clap)
    assert_eq!(tv2d(&["params", "--bogus"]).status.code(), Some(2));
    // missing config file -> 2
    assert_eq!(
        tv2d(&["params", "--config", "/nonexistent/cfg.json"]).status.code(),
        Some(2)
    );
    // unknown config field -> 2
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{\"bogus\": 1}").unwrap();
    assert_eq!(
        tv2d(&["params", "--config", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    // fast verification check -> 0
    assert_eq!(
        tv2d(&["verify", "--check", "kronig"]).status.code(),
        Some(0)
    );
    // threads cap accepted
    assert_eq!(
        tv2d(&["--threads", "1", "params", "--nu", "0.55"]).status.code(),
        Some(0)
    );
}
