use std::path::Path;
use std::process::{Command, Output};

use ris_bench::ResultTable;

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-bench")).args(args).output().unwrap()
}

fn smoke_config() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.toml").display().to_string()
}

#[test]
fn smoke_run_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = bench(&["run", &smoke_config(), "--out", &out, "--threads", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["results.csv", "timings.csv", "missing.csv", "config.toml", "rate_vs_M.svg"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let table = ResultTable::read_csv(std::fs::File::open(dir.path().join("results.csv")).unwrap()).unwrap();
    // 2 sweep points, 3 seeds, 5 methods
    assert_eq!(table.data_rows().count(), 30);
    let echoed = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert!(ris_bench::ExperimentConfig::from_toml(&echoed).is_ok());
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "family = \"rate_vs_M\"\nsweep = [8, 4]\n").unwrap();
    let p = path.display().to_string();
    assert_eq!(bench(&["run", &p]).status.code(), Some(2));
    assert_eq!(bench(&["validate", &p]).status.code(), Some(2));
    std::fs::write(&path, "family = \"rate_vs_M\"\nunknown_key = 1\n").unwrap();
    assert_eq!(bench(&["validate", &p]).status.code(), Some(2));
    assert_eq!(bench(&["validate", "/nonexistent/config.toml"]).status.code(), Some(2));
}

#[test]
fn zero_threads_is_rejected() {
    assert_eq!(bench(&["run", &smoke_config(), "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn validate_reports_the_family() {
    let o = bench(&["validate", &smoke_config()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("rate_vs_M: ok"));
}

#[test]
fn fit_ris_prints_parameters() {
    let o = bench(&["fit-ris", "--R", "2"]);
    assert!(o.status.success());
    let p: ris_secrecy::RisParams = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(p.resistance, 2.0);
    assert!((p.beta_min - 0.3517918332562535).abs() < 1e-9);
    assert_eq!(bench(&["fit-ris", "--R", "-1"]).status.code(), Some(2));
}
