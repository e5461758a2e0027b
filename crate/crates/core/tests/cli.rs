use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nanoqed::runner::config::{PlacementConfig, SweepConfig};
use nanoqed::runner::{preset, ExperimentConfig};

fn nanoqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nanoqed")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> PathBuf {
    let path = dir.join(format!("{}.json", cfg.name));
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn find(dir: &Path, suffix: &str) -> PathBuf {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(suffix))
        .unwrap_or_else(|| panic!("no *{suffix} in {}", dir.display()))
}

#[test]
fn malformed_and_unknown_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    let status = nanoqed(&["scan", "--config", broken.to_str().unwrap(), "--out", out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(1));

    let mut value = serde_json::to_value(preset("fig2-desk").unwrap()).unwrap();
    value["geometry"]["colour"] = serde_json::json!("blue");
    let extra = dir.path().join("extra.json");
    std::fs::write(&extra, value.to_string()).unwrap();
    let output = nanoqed(&["scan", "--config", extra.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("colour"));

    assert_eq!(nanoqed(&["scan", "--preset", "no-such-preset"]).status.code(), Some(1));
    assert_eq!(nanoqed(&["scan"]).status.code(), Some(1));
}

#[test]
fn oracle_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let good = nanoqed(&["oracle", "--instances", "8", "--max-scatterers", "20", "--out", out]);
    assert_eq!(good.status.code(), Some(0), "{}", String::from_utf8_lossy(&good.stderr));
    let report: serde_json::Value = serde_json::from_slice(&good.stdout).unwrap();
    assert_eq!(report["passed"], serde_json::json!(true));
    let bad = nanoqed(&["oracle", "--instances", "8", "--max-scatterers", "20", "--out", out, "--corrupt-coupling-sign"]);
    assert_eq!(bad.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("oracle.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], serde_json::json!(false));
}

#[test]
fn strict_mode_turns_a_point_failure_into_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig5-desk").unwrap();
    cfg.name = "too-close".into();
    cfg.sweep = SweepConfig::list(vec![50.0, 300.0], None);
    cfg.vdw.enabled = false;
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let args = ["scan", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let lenient = nanoqed(&args);
    assert_eq!(lenient.status.code(), Some(0), "{}", String::from_utf8_lossy(&lenient.stderr));
    assert!(String::from_utf8_lossy(&lenient.stdout).contains("1 failures"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(nanoqed(&strict).status.code(), Some(2));
}

#[test]
fn presets_list_and_round_trip() {
    let listing = nanoqed(&["presets"]);
    assert!(listing.status.success());
    let text = String::from_utf8_lossy(&listing.stdout).to_string();
    for name in nanoqed::runner::PRESET_NAMES {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name}");
    }
    let shown = nanoqed(&["presets", "--show", "fig3-desk"]);
    assert!(shown.status.success());
    let parsed = ExperimentConfig::from_json(&String::from_utf8_lossy(&shown.stdout)).unwrap();
    assert_eq!(parsed, preset("fig3-desk").unwrap());
    assert_eq!(nanoqed(&["presets", "--show", "nope"]).status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig3-desk").unwrap();
    cfg.name = "threads".into();
    cfg.placement = PlacementConfig::disordered(4, 3);
    cfg.sweep = SweepConfig::list(vec![260.0, 320.0, 400.0], None);
    let path = write_config(dir.path(), &cfg);
    let mut csvs = Vec::new();
    for threads in ["1", "2"] {
        let out = dir.path().join(format!("out{threads}"));
        let run = nanoqed(&["scan", "--config", path.to_str().unwrap(), "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        csvs.push(std::fs::read(find(&out, "scan.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn fit_writes_the_permittivity_table() {
    let dir = tempfile::tempdir().unwrap();
    let run = nanoqed(&["fit", "--preset", "fig3-desk", "--out", dir.path().to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(find(dir.path(), "fit.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert!(lines.next().unwrap().contains("omega"));
    assert!(lines.count() > 10);
}

#[test]
fn period_scan_summarizes_each_period() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig7-desk").unwrap();
    cfg.name = "periods".into();
    cfg.sweep = SweepConfig::list(vec![180.0], None);
    cfg.vdw.enabled = false;
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let run = nanoqed(&["period-scan", "--config", path.to_str().unwrap(), "--periods-nm", "280", "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(find(&out, "periods.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("280,180,3,"));

    let cylinder = nanoqed(&["period-scan", "--preset", "fig2-desk", "--periods-nm", "300", "--out", out.to_str().unwrap()]);
    assert_eq!(cylinder.status.code(), Some(1));
}
