use std::path::PathBuf;

use serde_json::Value;

use nanoqed::runner::config::SweepConfig;
use nanoqed::runner::{
    cmd_scan, preset, RunOptions, CONVERGE_COLUMNS, FIT_COLUMNS, PERIOD_COLUMNS, SCAN_COLUMNS, VDW_COLUMN, VDW_COLUMNS,
};

fn schema(file: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(file);
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn names(columns: &Value) -> Vec<String> {
    columns.as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect()
}

#[test]
fn csv_schemas_list_the_written_columns() {
    let doc = schema("csv_columns.json");
    let files = &doc["files"];
    let expect: [(&str, &[&str]); 5] = [
        ("scan.csv", &SCAN_COLUMNS),
        ("vdw.csv", &VDW_COLUMNS),
        ("fit.csv", &FIT_COLUMNS),
        ("converge.csv", &CONVERGE_COLUMNS),
        ("periods.csv", &PERIOD_COLUMNS),
    ];
    for (file, cols) in expect {
        assert_eq!(names(&files[file]["columns"]), cols, "{file}");
    }
    assert_eq!(names(&files["scan.csv"]["optional_columns"]), [VDW_COLUMN]);
}

fn check_required(schema: &Value, value: &Value, at: &str) {
    if let Some(required) = schema["required"].as_array() {
        for key in required {
            let key = key.as_str().unwrap();
            assert!(value.get(key).is_some(), "{at}: missing {key}");
        }
    }
    if let (Some(props), Some(obj)) = (schema["properties"].as_object(), value.as_object()) {
        for (key, sub) in props {
            if let Some(v) = obj.get(key) {
                check_required(sub, v, &format!("{at}.{key}"));
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        for (i, v) in arr.iter().enumerate() {
            check_required(items, v, &format!("{at}[{i}]"));
        }
    }
}

#[test]
fn scan_outputs_match_their_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("fig2-desk").unwrap();
    cfg.name = "schema".into();
    cfg.sweep = SweepConfig::list(vec![300.0, 500.0], None);
    let resolved = cfg.resolve().unwrap();
    let opts = RunOptions { out_dir: dir.path().to_path_buf(), ..RunOptions::default() };
    let outcome = cmd_scan(&resolved, &opts).unwrap();

    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(&outcome.sidecar).unwrap()).unwrap();
    let sidecar_schema = schema("scan_sidecar.schema.json");
    check_required(&sidecar_schema, &sidecar, "sidecar");
    for key in sidecar.as_object().unwrap().keys() {
        assert!(sidecar_schema["properties"].get(key).is_some(), "undocumented sidecar key {key}");
    }

    let text = std::fs::read_to_string(&outcome.csv).unwrap();
    let header: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let mut documented = SCAN_COLUMNS.to_vec();
    if cfg.vdw.enabled {
        documented.push(VDW_COLUMN);
    }
    assert_eq!(header, documented);
}
