use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn dickelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dickelab")).args(args).output().unwrap()
}

fn run(sub: &str, cfg: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    dickelab(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn evolve_emits_csv_with_header_and_initial_row() {
    let o = run("evolve", &config("jc_vacuum_rabi.json"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stderr.is_empty());
    let text = stdout(&o);
    let mut lines = text.split("\r\n");
    assert_eq!(lines.next(), Some("time,P_excited,photon_number"));
    assert_eq!(lines.next(), Some("0.0,1.0,0.0"));
    assert!(text.ends_with("\r\n"));

    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2001);
    for r in &rows {
        let p: f64 = r[1].parse().unwrap();
        let n: f64 = r[2].parse().unwrap();
        assert!((p + n - 1.0).abs() < 1e-8);
    }
}

#[test]
fn sweep_json_carries_the_classification() {
    let o = run("sweep", &config("tc_vacuum_rabi_sweep.json"), &["--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["label"], "sqrt_N");
    assert_eq!(v["n_values"], serde_json::json!([1, 2, 4, 8]));
    assert!((v["exponent"].as_f64().unwrap() - 0.5).abs() < 0.02);
}

#[test]
fn sweep_csv_lists_one_row_per_n() {
    let o = run("sweep", &config("supertransfer_sweep.json"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("N,short_time_transfer\r\n1,"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn energetics_reports_the_tantalum_row() {
    let o = run("energetics", &config("tantalum_energy.json"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["formula"], "ev_to_kwh");
    let value = v["value"].as_f64().unwrap();
    assert!((value - 11104.45).abs() / 11104.45 < 1e-3, "{value}");
}

#[test]
fn nuclear_config_includes_the_discrepancy() {
    let o = run("energetics", &config("nuclear_rate.json"), &[]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["discrepancy"]["printed"].as_f64(), Some(1e-34));
    let gap = v["discrepancy"]["log10_gap"].as_f64().unwrap();
    assert!((gap - 2.2).abs() < 0.05, "{gap}");
}

#[test]
fn json_output_round_trips_exactly() {
    let o = run("evolve", &config("jc_vacuum_rabi.json"), &["--format", "json", "--set", "t_max=5", "--set", "dt_output=1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["labels"], serde_json::json!(["P_excited", "photon_number"]));
    assert_eq!(v["times"].as_array().unwrap().len(), 6);
    let p1 = v["records"][1][0].as_f64().unwrap();
    assert!((p1 - 0.1f64.cos().powi(2)).abs() < 1e-9);
    let again = serde_json::to_vec_pretty(&v).unwrap();
    let w: serde_json::Value = serde_json::from_slice(&again).unwrap();
    assert_eq!(v, w);
}

#[test]
fn output_flag_writes_the_file_and_nothing_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("jc.csv");
    let o = run("evolve", &config("jc_vacuum_rabi.json"), &["--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("time,P_excited,photon_number\r\n0.0,1.0,0.0\r\n"));
}

#[test]
fn overrides_change_the_run() {
    let o = run("evolve", &config("jc_vacuum_rabi.json"), &["--set", "observables=[\"Jz\"]", "--set", "t_max=1", "--set", "dt_output=1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("time,Jz\r\n0.0,0.5\r\n"));
}

#[test]
fn validate_accepts_every_shipped_config() {
    for entry in std::fs::read_dir(config("")).unwrap() {
        let path = entry.unwrap().path();
        let o = run("validate", &path, &[]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stderr(&o));
    }
}

#[test]
fn negative_coupling_is_one_violation_with_its_path() {
    let o = run("validate", &config("jc_vacuum_rabi.json"), &["--set", "model.g=-0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err = stderr(&o);
    let violations: Vec<&str> = err.lines().filter(|l| l.starts_with("  ")).collect();
    assert_eq!(violations.len(), 1, "{err}");
    assert!(violations[0].contains("model.g"), "{err}");
}

#[test]
fn unknown_family_lists_the_accepted_ones() {
    let o = run("validate", &config("jc_vacuum_rabi.json"), &["--set", "model.family=ising"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("model.family"), "{err}");
    for f in ["rabi", "jaynes_cummings", "dicke", "tavis_cummings", "supertransfer", "driven_battery"] {
        assert!(err.contains(f), "{err}");
    }
}

#[test]
fn syntax_errors_report_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\n  \"version\": 1,\n  \"command\": \"evolve\"\n  \"t_max\": 1\n}\n").unwrap();
    let o = run("validate", &path, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("broken.json:4:3"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_a_config_error() {
    let o = dickelab(&["evolve", "--config", "/nonexistent/run.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn wrong_subcommand_is_rejected() {
    let o = run("sweep", &config("jc_vacuum_rabi.json"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("evolve"));
}

#[test]
fn truncation_leak_exits_with_the_numerical_code() {
    let o = run(
        "evolve",
        &config("jc_vacuum_rabi.json"),
        &["--set", "model.family=rabi", "--set", "model.g=0.3", "--set", "t_max=20"],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("cavity"), "{}", stderr(&o));
}

#[test]
fn failed_runs_leave_existing_output_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("keep.csv");
    std::fs::write(&path, "previous").unwrap();
    let o = run(
        "evolve",
        &config("jc_vacuum_rabi.json"),
        &["--output", path.to_str().unwrap(), "--set", "model.family=rabi", "--set", "model.g=0.3"],
    );
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "previous");
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_dickelab"))
        .args(["validate", "--config", config("jc_vacuum_rabi.json").to_str().unwrap()])
        .env("DICKELAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
