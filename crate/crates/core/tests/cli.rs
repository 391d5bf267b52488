use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_utp");

fn utp(cmd: &str, config: &str, dir: &Path, extra: &[&str], threads: &str) -> Output {
    let conf = dir.join(format!("{cmd}.conf"));
    fs::write(&conf, config).unwrap();
    Command::new(BIN)
        .arg(cmd)
        .arg("--config")
        .arg(&conf)
        .arg("--out")
        .arg(dir.join(format!("out_{cmd}")))
        .args(extra)
        .env("UTP_THREADS", threads)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const BASELINE: &str = "L = 1\nc_left = 2\nc_right = 1\nm1 = 2\nm2 = 2\nh2_rule = equal\nnu = 1\n";

#[test]
fn run_baseline_takes_five_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("run", BASELINE, dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("iterations: 5\n"));
    let out = dir.path().join("out_run");
    for f in ["field.csv", "mask.csv", "field.bin", "iterations.jsonl", "tents.svg", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let log = fs::read_to_string(out.join("iterations.jsonl")).unwrap();
    let ks: Vec<u64> = log
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["k"].as_u64().unwrap())
        .collect();
    assert_eq!(ks.iter().max(), Some(&5));
}

#[test]
fn run_with_eight_slow_subdomains_takes_nine() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("run", &format!("{BASELINE}m2 = 8\n").replace("m2 = 2\n", ""), dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("iterations: 9\n"), "{}", stdout(&o));
}

#[test]
fn zero_fast_subdomains_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("run", "m1 = 0\n", dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`m1`"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("tents", "speed = 3\n", dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`speed`"));
}

#[test]
fn sweep_ranks_equal_counts_first() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("sweep", BASELINE, dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out_sweep/report.json")).unwrap()).unwrap();
    let first = &report["entries"][0];
    assert_eq!(first["m2"], 2);
    assert_eq!(first["h2_rule"], "equal");
    assert_eq!(first["rank"], 1);
    assert!(dir.path().join("out_sweep/gantt_m2_2_equal.svg").exists());
}

#[test]
fn sweep_totals_at_unit_fast_speed() {
    let dir = tempfile::tempdir().unwrap();
    let conf = "L = 1\nc_left = 1\nc_right = 0.5\nm1 = 2\nsweep_m2 = 1, 2\nsweep_h2 = equal\n";
    let o = utp("sweep", conf, dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out_sweep/report.json")).unwrap()).unwrap();
    let entry = |m2: u64| {
        report["entries"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["m2"] == m2)
            .unwrap()
            .clone()
    };
    assert_eq!(entry(2)["total_cost"].as_f64(), Some(0.25));
    assert_eq!(entry(2)["closed_form"].as_f64(), Some(0.25));
    assert_eq!(entry(1)["closed_form"].as_f64(), Some(0.5));
}

#[test]
fn empty_strategy_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("sweep", &format!("{BASELINE}sweep_m2 =\n"), dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty strategy list"));
}

#[test]
fn oracle_passes_on_optimal_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("oracle", BASELINE, dir.path(), &[], "2");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("uncertified nodes: 0"));
}

#[test]
fn oracle_reports_dalembert_for_homogeneous_unit_courant() {
    let dir = tempfile::tempdir().unwrap();
    let conf = "c_left = 1\nc_right = 1\nT = 1\ninitial_data = standing_mode(1)\n";
    let o = utp("oracle", conf, dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let res: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out_oracle/oracle.json")).unwrap()).unwrap();
    assert!(res["dalembert_dev"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn corrupted_assembly_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("oracle", BASELINE, dir.path(), &["--inject-fault"], "0");
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn unresolvable_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("run", "points_per_subdomain = 1\n", dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("points_per_subdomain"), "{}", stderr(&o));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("run", BASELINE, dir.path(), &[], "many");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("UTP_THREADS"));
}

#[test]
fn pipeline_and_tents_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = utp("pipeline", BASELINE, dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out_pipeline/pipeline.csv")).unwrap();
    assert!(csv.starts_with("process,k,j,cost,start,end,idle_after\n"));
    assert_eq!(csv.lines().count(), 1 + 18);
    let o = utp("tents", BASELINE, dir.path(), &[], "0");
    assert_eq!(o.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("out_tents/tents.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("width=\"800\""));
}

#[test]
fn outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["run", "sweep", "pipeline", "tents", "oracle"] {
        let oa = utp(cmd, BASELINE, a.path(), &[], "0");
        let ob = utp(cmd, BASELINE, b.path(), &[], "3");
        assert_eq!(oa.status.code(), Some(0));
        assert_eq!(ob.status.code(), Some(0));
        let ma = fs::read(a.path().join(format!("out_{cmd}/manifest.json"))).unwrap();
        let mb = fs::read(b.path().join(format!("out_{cmd}/manifest.json"))).unwrap();
        assert_eq!(ma, mb, "{cmd}");
    }
}
