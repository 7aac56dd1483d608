use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parareal-lab"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

#[test]
fn scalar_demo_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("scalar_demo.json"), dir.path(), &["--traces"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert!(lines.next().unwrap().starts_with("p,t_p,mode,policy,seed"));
    assert_eq!(lines.count(), 4);
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("traces/sync_p4.json").exists());
    assert!(dir.path().join("traces/async_p4_0.jsonl").exists());
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(
            run(&config("scalar_demo.json"), out, &["--traces"])
                .status
                .code(),
            Some(0)
        );
    }
    for file in [
        "summary.csv",
        "report.json",
        "traces/sync_p4.json",
        "traces/async_p4_1.jsonl",
    ] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn seed_override_replaces_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &config("scalar_demo.json"),
        dir.path(),
        &["--seed-override", "100"],
    );
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let seeds: Vec<u64> = report["config"]["schedules"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, vec![100, 101]);
}

#[test]
fn missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &dir.path().join("absent.json"),
        &dir.path().join("out"),
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
}

#[test]
fn invalid_field_exits_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"problem": {"kind": "scalar-decay"},
            "decomposition": {"p": 4, "coarse_dt": 0.25, "fine_dt": 0.01},
            "epsilon": -1.0}"#,
    )
    .unwrap();
    let out = run(&path, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
}

#[test]
fn exhausted_horizon_exits_two_after_writing_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.json");
    fs::write(
        &path,
        r#"{"problem": {"kind": "heat1d", "n_interior": 4},
            "decomposition": {"p": 8, "coarse_dt": 0.2, "fine_dt": 0.002},
            "schedules": [{"policy": "random-fair", "seed": 1, "delay_bound": 2, "max_events": 10}]}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&path, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(2));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary
        .lines()
        .any(|l| l.contains(",async,") && l.contains(",false,horizon,")));
}

#[test]
fn table_command_renders_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&config("heat_table1.json"), dir.path(), &[])
            .status
            .code(),
        Some(0)
    );
    let table = dir.path().join("table.csv");
    let out = bin()
        .arg("table")
        .arg("--in")
        .arg(dir.path())
        .arg("--out")
        .arg(&table)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&table).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "p,T_p,mode,iterations,model_cost,fitted_C_bar,error_vs_oracle"
    );
    // three p values, each with sequential, sync and four async rows
    assert_eq!(lines.len(), 1 + 3 * 6);
    assert!(lines[1].starts_with("4,0.8,sequential,,56,"));
    let sync16 = lines
        .iter()
        .find(|l| l.starts_with("16,3.2,sync,"))
        .unwrap();
    let k: usize = sync16.split(',').nth(3).unwrap().parse().unwrap();
    assert!((1..=16).contains(&k));
}

#[test]
fn table_without_report_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("table")
        .arg("--in")
        .arg(dir.path())
        .arg("--out")
        .arg(dir.path().join("t.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn log_variable_enables_info_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("PARAREAL_LAB_LOG", "info")
        .arg("run")
        .arg("--config")
        .arg(config("scalar_demo.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sync: k="));
}
