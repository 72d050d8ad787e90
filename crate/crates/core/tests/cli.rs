//! End-to-end tests of the command line tool.

use std::path::Path;
use std::process::{Command, Output};

use ris_secrecy::harness::csv::parse_csv;
use ris_secrecy::harness::{Case, CSV_HEADER};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-secrecy"))
        .args(args)
        .env("RIS_ADV_THREADS", "2")
        .output()
        .expect("binary runs")
}

const SMALL: &str = r#"
params.M = 2
params.N = 4
sweep.values = [2, 4]
seeds = 3
solver.randomizations = 100
"#;

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    std::fs::write(&path, SMALL).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let out = run(&[]);
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stderr) + String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Usage"), "{text}");
    assert!(text.contains("sweep-n") && text.contains("oracle-check"));
}

#[test]
fn unknown_subcommand_or_flag_fails() {
    for args in [&["sweep-x"][..], &["sweep-n", "--frobnicate"][..]] {
        let out = run(args);
        assert!(!out.status.success());
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    }
}

#[test]
fn config_errors_name_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "params.M = 2\nparams.antenna_count = 4\n").unwrap();
    let out = run(&["sweep-n", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("antenna_count"), "{err}");
}

#[test]
fn sweep_writes_csv_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(run(&["sweep-n", "--config", &config, "--out", a.to_str().unwrap()])
        .status
        .success());
    let out = Command::new(env!("CARGO_BIN_EXE_ris-secrecy"))
        .args(["sweep-n", "--config", &config, "--out", b.to_str().unwrap()])
        .env("RIS_ADV_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());

    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 6);
    for (row, (value, case)) in rows
        .iter()
        .zip([2.0, 4.0].iter().flat_map(|v| Case::ALL.map(|c| (*v, c))))
    {
        assert_eq!((row.variable.as_str(), row.value, row.case), ("N", value, case));
        assert_eq!(row.n_seeds, 3);
        assert!(row.mean_rate >= 0.0 && row.std_rate >= 0.0);
    }
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = run(&["sweep-y", "--config", &config, "--seed-count", "1", "--cases", "no_ris"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows
        .iter()
        .all(|r| r.variable == "y" && r.case == Case::NoRis && r.n_seeds == 1));
    // without the surface the rate does not depend on its position
    assert!(rows.iter().all(|r| r.mean_rate == rows[0].mean_rate));
}

#[test]
fn solve_reports_dominance() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = run(&["solve", "--config", &config, "--seed", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rate = |label: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(label)).unwrap();
        line.split_whitespace().nth(2).unwrap().parse().unwrap()
    };
    assert!(rate("eavesdrop_jam") <= rate("eavesdrop_only") + 0.02, "{text}");
    assert!(rate("eavesdrop_only") <= rate("no_ris") + 1e-9, "{text}");
    assert!(text.contains("P_j"));
}

#[test]
fn shipped_config_loads() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference.cfg");
    let config = ris_secrecy::harness::ExperimentConfig::load(Path::new(path)).unwrap();
    assert_eq!(
        config,
        ris_secrecy::harness::ExperimentConfig {
            output: Some("fig3.csv".into()),
            ..Default::default()
        }
    );
}

#[test]
fn plot_emits_script() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig.csv");
    let out = run(&["plot", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let script = std::fs::read_to_string(dir.path().join("fig.py")).unwrap();
    assert!(script.contains("matplotlib") && script.contains(csv.to_str().unwrap()));
}
