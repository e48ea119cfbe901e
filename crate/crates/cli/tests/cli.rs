use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_higgs-geom"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL_AF: &str = r#"{"construction": "almost_fuchsian", "chart": {"kind": "disc", "resolution": [32, 64]},
    "inputs": {"beta": {"constant": [BETA, 0]}}, "emit": {"svg": false, "csv": false}}"#;

#[test]
fn schema_prints_the_shipped_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["schema"], dir.path());
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), higgs_schema());
}

fn higgs_schema() -> String {
    fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/schema/run_config.schema.json"),
    )
    .unwrap()
}

#[test]
fn malformed_config_exits_one_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\"construction\": ");
    let out = dir.path().join("out");
    let o = bin(
        &["pipeline", &cfg, "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    let err: serde_json::Value = serde_json::from_str(
        String::from_utf8_lossy(&o.stderr)
            .split_once(": ")
            .unwrap()
            .1,
    )
    .unwrap();
    assert!(
        err["error"].as_str().unwrap().contains("malformed"),
        "{err}"
    );
}

#[test]
fn schema_violation_reports_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"construction": "ads_m", "chart": {"kind": "disc"}}"#,
    );
    let o = bin(&["solve", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["path"], "/inputs");
    assert!(fs::read_dir(dir.path()).unwrap().count() == 1);
}

#[test]
fn pipeline_exit_codes_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "good.json", &SMALL_AF.replace("BETA", "0.5"));
    let edge = write_config(dir.path(), "edge.json", &SMALL_AF.replace("BETA", "1"));
    let out = dir.path().join("runs");
    let o = bin(
        &["pipeline", &good, "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("report.json").is_file());

    let o = bin(
        &[
            "pipeline",
            &good,
            &edge,
            "--out",
            out.to_str().unwrap(),
            "--jobs",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("edge").join("report.json")).unwrap())
            .unwrap();
    assert_eq!(
        report["verdict"],
        serde_json::json!({"Failed": "transversality"})
    );
    assert!(out.join("good").join("report.json").is_file());
}

#[test]
fn stage_commands_print_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "h.json",
        r#"{"construction": "hyperbolic", "chart": {"kind": "disc", "resolution": [16, 32]}, "output_dir": "h"}"#,
    );
    let o = bin(&["solve", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["converged"], true);
    assert!(dir.path().join("h/fields/h_1.csv").is_file());

    let o = bin(&["check", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(s["global_min"].as_f64().unwrap() > 1e-6);
    assert!(dir.path().join("h/fields/margin.csv").is_file());

    let o = bin(&["develop", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("h/plots/developing.svg").is_file());
}
