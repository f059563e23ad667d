use std::path::Path;

use serde_json::Value;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["dslift"];
    argv.extend_from_slice(args);
    dslift_cli::run(argv)
}

fn json(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["basis", "--max-degree", "many"]), 2);
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]), 0);
}

#[test]
fn invalid_parameters_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["--outdir", out, "basis", "--alpha1", "-1.5"]), 2);
    assert_eq!(run(&["--outdir", out, "heat", "--t-list", "0.1,-1"]), 2);
    assert_eq!(run(&["--outdir", out, "transplant", "--alpha1", "1.25"]), 2);
}

#[test]
fn basis_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        run(&[
            "--outdir",
            out,
            "basis",
            "--max-degree",
            "4",
            "--grid-size",
            "33"
        ]),
        0
    );
    let csv = std::fs::read_to_string(dir.path().join("basis.csv")).unwrap();
    assert!(csv.lines().count() > 33);
    let meta = json(dir.path(), "basis");
    assert!(meta.get("anchor").and_then(Value::as_str).is_some());
}

#[test]
fn imageset_reports_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["--outdir", out, "imageset"]), 0);
    let meta = json(dir.path(), "imageset");
    assert!(meta.as_object().unwrap().len() > 3);
    assert!(dir.path().join("imageset.csv").exists());
}
