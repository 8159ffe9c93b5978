//! Every JSON file the CLI writes is validated against its shipped schema
//! with the Python `jsonschema` package (Draft 2020-12).

use std::path::{Path, PathBuf};
use std::process::Command;

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas")
}

fn csf(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_csf")).current_dir(dir).env_remove("CSF_OUT_DIR").args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn python_jsonschema_available() -> bool {
    Command::new("python3").args(["-c", "import jsonschema"]).output().is_ok_and(|o| o.status.success())
}

const VALIDATE: &str = r#"
import json, sys, jsonschema
schema = json.load(open(sys.argv[1]))
jsonschema.Draft202012Validator.check_schema(schema)
for path in sys.argv[2:]:
    jsonschema.Draft202012Validator(schema).validate(json.load(open(path)))
"#;

fn validate(schema: &str, documents: &[PathBuf]) {
    let schema_path = schema_dir().join(format!("{schema}.schema.json"));
    let out = Command::new("python3").arg("-c").arg(VALIDATE).arg(&schema_path).args(documents).output().unwrap();
    assert!(out.status.success(), "{schema}: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn schemas_are_well_formed_json() {
    let mut names: Vec<String> = std::fs::read_dir(schema_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "assess_output.schema.json",
            "classify_output.schema.json",
            "features_report.schema.json",
            "filter_report.schema.json",
            "gradcheck_report.schema.json",
            "simulation_sidecar.schema.json",
        ]
    );
    for name in names {
        let text = std::fs::read_to_string(schema_dir().join(&name)).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["$schema"], "https://json-schema.org/draft/2020-12/schema", "{name}");
        for reference in text.match_indices("#/$defs/").map(|(i, _)| &text[i + 8..]) {
            let key = &reference[..reference.find('"').unwrap()];
            assert!(value["$defs"].get(key).is_some(), "{name}: dangling reference {key}");
        }
    }
}

#[test]
fn cli_outputs_match_their_schemas() {
    if !python_jsonschema_available() {
        eprintln!("python3 with jsonschema not found; schema validation skipped");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    csf(d, &["simulate", "--n-samples", "2048", "-o", "s.csv"]);
    csf(d, &["simulate", "--outlier-sigma", "8", "--n-samples", "1024", "-o", "o.csv"]);
    csf(d, &["simulate", "--fault", "normal", "--n-samples", "2048", "-o", "n.csv"]);
    csf(d, &["filter", "s.csv", "--max-iterations", "20"]);
    csf(d, &["filter", "s.csv", "--method", "med", "--max-iterations", "5"]);
    csf(d, &["features", "s.csv", "n.csv"]);
    csf(d, &["features", "s.csv", "--filtered", "--max-iterations", "10", "--format", "json", "-o", "ff.json"]);
    csf(d, &["--out-dir", "a", "assess", "--simulate", "--n-files", "24", "--onset", "21", "--n-samples", "1024", "--max-iterations", "10"]);
    csf(d, &["--out-dir", "c", "classify", "--simulate", "--per-class", "2", "--n-samples", "1024", "--max-iterations", "10"]);
    csf(d, &["--out-dir", "g", "gradcheck", "--trials", "2"]);

    validate("simulation_sidecar", &[d.join("s.json"), d.join("o.json"), d.join("n.json")]);
    validate("filter_report", &[d.join("s_csf.json"), d.join("s_med.json")]);
    validate("features_report", &[d.join("features.json"), d.join("ff.json")]);
    validate("assess_output", &[d.join("a/assess.json")]);
    validate("classify_output", &[d.join("c/classify.json")]);
    validate("gradcheck_report", &[d.join("g/gradcheck.json")]);
}

#[test]
fn schemas_reject_malformed_documents() {
    if !python_jsonschema_available() {
        eprintln!("python3 with jsonschema not found; schema validation skipped");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("bad.json");
    std::fs::write(&doc, r#"{"config": {}, "trials": [], "max_relative_error": "small", "passed": true}"#).unwrap();
    let schema_path = schema_dir().join("gradcheck_report.schema.json");
    let out = Command::new("python3").arg("-c").arg(VALIDATE).arg(&schema_path).arg(&doc).output().unwrap();
    assert!(!out.status.success());
}
