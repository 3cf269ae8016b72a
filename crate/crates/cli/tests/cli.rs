use std::process::{Command, Output};

fn tlcell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlcell")).args(args).output().expect("binary runs")
}

fn csv_rows(out: &Output) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    r.records().collect::<Result<_, _>>().unwrap()
}

#[test]
fn fixtures_all_pass() {
    let out = tlcell(&["fixtures"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("all fixtures pass"));
    let rows = csv_rows(&out);
    assert!(rows.len() >= 10);
    assert!(rows.iter().all(|r| &r[2] == "true"));
}

#[test]
fn xxz_b_single_size() {
    let out = tlcell(&["xxz-b", "--sizes", "4"]);
    assert!(out.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "4");
    let b: f64 = rows[0][2].parse().unwrap();
    assert!((b + 1.36035).abs() < 1e-4, "b = {b}");
    assert_eq!(&rows[0][8], "hamiltonian");
    assert_eq!(&rows[0][9], "formal-q");
}

#[test]
fn xxz_b_json_has_extrapolation() {
    let out = tlcell(&["--format", "json", "xxz-b", "--sizes", "4,8,12"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], "tlcell-report/1");
    assert_eq!(v["ok"], true);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3]["L"], "inf");
    assert!(v["summary"]["extrapolation"]["value"].is_number());
    assert_eq!(v["summary"]["measurements"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_or_empty_sizes_is_usage_error() {
    for args in [&["xxz-b"][..], &["xxz-b", "--sizes"], &["xxz-b", "--sizes", ""]] {
        let out = tlcell(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn invalid_size_fails() {
    let out = tlcell(&["xxz-b", "--sizes", "5"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_model_param_fails() {
    let out = tlcell(&["--model-param", "x", "polymer-b", "--sizes", "4"]);
    assert!(!out.status.success());
}

#[test]
fn percolation_is_diagonalizable() {
    let out = tlcell(&["percolation-check", "--sizes", "4,6,8"]);
    assert!(out.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(&r[6], "yes");
        assert!(r[5].parse::<f64>().unwrap() < 1e-8);
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("tlcell-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ising.csv");
    let a = tlcell(&["ising-entropy", "--sizes", "4,6,8,10"]);
    let b = tlcell(&["--out", path.to_str().unwrap(), "ising-entropy", "--sizes", "4,6,8,10"]);
    assert!(a.status.success() && b.status.success());
    assert!(b.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn loop_entropy_grid() {
    let out = tlcell(&["--model-param", "n=0.5,1.5", "--model-param", "n1=0.5,1", "loop-entropy", "--sizes", "4,6,8,10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 4 * 5);
    assert!(rows.iter().filter(|r| &r[2] == "inf").all(|r| !r[4].is_empty()));
}

#[test]
fn reports_match_shipped_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let runs: [&[&str]; 6] = [
        &["fixtures"],
        &["xxz-b", "--sizes", "4,8,12"],
        &["--model-param", "y=2", "deformed-b", "--sizes", "4"],
        &["percolation-check", "--sizes", "4"],
        &["ising-entropy", "--sizes", "4,6,8"],
        &["loop-entropy", "--sizes", "4,6,8"],
    ];
    for args in runs {
        let out = tlcell(&[&["--format", "json"], args].concat());
        assert!(out.status.success(), "{args:?}");
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}
