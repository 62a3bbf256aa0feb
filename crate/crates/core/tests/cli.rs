use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::tempdir;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn nilmsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilmsim"))
        .args(args)
        .env_remove("NILMSIM_OUT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn simulate_kettle(out: &Path) {
    let o = nilmsim(&[
        "simulate",
        "--scenario",
        fixture("kettle.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_scenario_is_an_io_error() {
    let o = nilmsim(&["validate", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(74));
}

#[test]
fn validate_and_list() {
    let o = nilmsim(&["validate", "--scenario", fixture("kitchen_evening.toml").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("7 appliances, 14 actions"), "{}", stdout(&o));

    let o = nilmsim(&["list-appliances"]);
    assert!(o.status.success());
    for kind in ["incandescent", "on_off_heater", "fsm_table", "triac_dimmer", "refrigerator"] {
        assert!(stdout(&o).contains(kind), "{kind}");
    }
}

#[test]
fn bad_scenario_is_a_config_error() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "duration_s = -1\n").unwrap();
    let o = nilmsim(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(65));
}

#[test]
fn simulate_writes_every_file() {
    let dir = tempdir().unwrap();
    simulate_kettle(dir.path());
    let aggregate = std::fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    let mut lines = aggregate.lines();
    assert_eq!(lines.next().unwrap(), "time_s,v_rms,i_rms,p_w,q_var,s_va,pf,freq_hz");
    assert_eq!(lines.count(), 8000);
    let events = std::fs::read_to_string(dir.path().join("events.jsonl")).unwrap();
    assert_eq!(events.lines().count(), 2);
    for line in events.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 5);
    }
    assert!(dir.path().join("appliance_kettle.csv").exists());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["report_hz"], 20.0);
}

#[test]
fn format_selects_outputs() {
    let dir = tempdir().unwrap();
    let o = nilmsim(&[
        "simulate",
        "--scenario",
        fixture("kettle.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "events_jsonl,meta_json",
    ]);
    assert!(o.status.success());
    assert!(!dir.path().join("aggregate.csv").exists());
    assert!(dir.path().join("events.jsonl").exists());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nilmsim"))
        .args(["simulate", "--scenario", fixture("kettle.toml").to_str().unwrap()])
        .env("NILMSIM_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("aggregate.csv").exists());
}

#[test]
fn stats_on_a_steady_interval() {
    let dir = tempdir().unwrap();
    simulate_kettle(dir.path());
    let d = dir.path().to_str().unwrap();
    let o = nilmsim(&["stats", "--dataset", d, "--appliance", "kettle", "--from", "100", "--to", "200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("1500.00±0.00"), "{out}");
    assert!(out.contains("100.00±0.00"), "{out}");

    let o = nilmsim(&["stats", "--dataset", d, "--from", "100.01", "--to", "100.06"]);
    assert_eq!(o.status.code(), Some(65));

    let o = nilmsim(&["stats", "--dataset", d, "--appliance", "toaster", "--from", "0", "--to", "10"]);
    assert_eq!(o.status.code(), Some(65));
}

#[test]
fn compare_against_itself() {
    let dir = tempdir().unwrap();
    simulate_kettle(dir.path());
    let d = dir.path().to_str().unwrap();
    let errors = dir.path().join("errors.csv");
    let o = nilmsim(&["compare", "--reference", d, "--model", d, "--errors-csv", errors.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("100.00"), "{out}");
    assert!(out.contains("0.000/0.000"), "{out}");
    assert_eq!(std::fs::read_to_string(errors).unwrap().lines().count(), 8001);
}

#[test]
fn compare_rejects_mismatched_datasets() {
    let a = tempdir().unwrap();
    let b = tempdir().unwrap();
    simulate_kettle(a.path());
    let o = nilmsim(&[
        "simulate",
        "--scenario",
        fixture("refrigerator_brand_b.toml").to_str().unwrap(),
        "--out",
        b.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = nilmsim(&["compare", "--reference", a.path().to_str().unwrap(), "--model", b.path().to_str().unwrap()]);
    assert!(!o.status.success());
}
