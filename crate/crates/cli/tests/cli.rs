use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn mql(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mql"))
        .args(args)
        .output()
        .expect("mql runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = mql(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn path(name: &str) -> String {
    model(name).to_string_lossy().into_owned()
}

#[test]
fn reflection_is_not_simple() {
    let r = json(&["simplicity", "--model", &path("reflection.json")]);
    assert_eq!(r["verdict"], "NotSimple");
    assert_eq!(r["condition_l"]["verdict"], "CertifiedAtRefinements");
    assert_eq!(r["strongly_absorbing"]["minimal_count"], 51);
    let counts: Vec<u64> = r["condition_l"]["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["base_points"].as_u64().unwrap())
        .collect();
    assert_eq!(counts, [1, 1, 1]);
}

#[test]
fn grid_option_overrides_points() {
    let r = json(&["simplicity", "--model", &path("reflection.json"), "--grid", "11"]);
    assert_eq!(r["strongly_absorbing"]["minimal_count"], 6);
    assert_eq!(r["model"]["states"], 11);
}

#[test]
fn cycle_fails_condition_l() {
    let r = json(&["analyze", "--model", &path("cycle3.json")]);
    assert_eq!(r["condition_l"]["verdict"], "Fails");
    assert_eq!(r["condition_l"]["witness"].as_array().unwrap().len(), 3);
    assert_eq!(r["irreducible"], true);

    let s = json(&["simplicity", "--model", &path("cycle3.json")]);
    assert_eq!(s["verdict"], "NotSimple");
    assert_eq!(s["witnesses"][0]["type"], "loop_without_exit");
}

#[test]
fn full_support_is_simple() {
    for m in ["full3.json", "uniform.json", "tent.json"] {
        let r = json(&["simplicity", "--model", &path(m)]);
        assert_eq!(r["verdict"], "Simple", "{m}");
    }
}

#[test]
fn cuntz_dual() {
    let r = json(&["dual", "--model", &path("cuntz2.json")]);
    assert_eq!(r["realization"]["holds"], true);
    assert_eq!(r["k_theory"]["equal"], true);
    assert_eq!(r["k_theory"]["base"]["display"], "K0 = 0, K1 = 0");
    assert_eq!(r["dual"]["vertices"], 2);
    assert_eq!(r["dual"]["edges"], 4);

    let f = json(&["dual", "--model", &path("full3.json")]);
    assert_eq!(f["k_theory"]["dual"]["display"], "K0 = Z/2, K1 = 0");
}

#[test]
fn ifs_reports() {
    let r = json(&["ifs", "--model", &path("tent.json"), "--maxlen", "6"]);
    assert_eq!(r["class"], "BranchOverlapOnly");
    assert_eq!(r["branch_points"], serde_json::json!([0.5]));
    assert_eq!(r["isometry"]["within_bound"], true);
    assert_eq!(r["certificate"]["verdict"], "Holds");
    assert_eq!(r["hutchinson"]["within_bounds"], true);

    let c = json(&["ifs", "--model", &path("cantor.json")]);
    assert_eq!(c["class"], "TotallyDisconnected");
    assert_eq!(c["attractor"]["points"], 8192);
}

#[test]
fn bad_column_sum_exits_2() {
    let out = mql(&["analyze", "--model", &path("bad_column.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("column 1") && err.contains("9/10"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    let missing = mql(&["analyze", "--model", "no/such/file.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let range = mql(&["analyze", "--model", &path("chain.json"), "--maxlen", "13"]);
    assert_eq!(range.status.code(), Some(2));
    let no_model = mql(&["dual"]);
    assert_eq!(no_model.status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("big.json");
    let labels: Vec<String> = (0..21).map(|i| format!("s{i}")).collect();
    std::fs::write(
        &big,
        serde_json::json!({"kind": "uniform", "space": {"type": "finite_set", "labels": labels}}).to_string(),
    )
    .unwrap();
    let out = mql(&["analyze", "--model", big.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("state count"));

    let out = mql(&["analyze", "--model", &path("reflection.json"), "--grid", "20001"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ifs_on_finite_model_exits_1() {
    let out = mql(&["ifs", "--model", &path("chain.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn json_is_deterministic() {
    for cmd in ["analyze", "simplicity", "dual", "ifs"] {
        let args = [cmd, "--model", &path("tent.json"), "--json", "--maxlen", "5"];
        let a = mql(&args);
        let b = mql(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn writes_report_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = mql(&["ifs", "--model", &path("cantor.json"), "--out", out, "--csv", "--maxlen", "4"]);
    assert!(r.status.success());
    for f in ["report.json", "report.txt", "attractor.csv", "certificate.csv", "hutchinson.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("attractor.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x"));
    assert_eq!(csv.lines().count(), 8193);

    let r = mql(&["dual", "--model", &path("chain.json"), "--out", out, "--dot"]);
    assert!(r.status.success());
    let dot = std::fs::read_to_string(dir.path().join("dual.dot")).unwrap();
    assert!(dot.starts_with("digraph"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "dual");
}

#[test]
fn transpose_reads_rows() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.json");
    std::fs::write(
        &rows,
        r#"{"kind": "finite_kernel", "states": ["a", "b", "c"],
            "matrix": [["0", "1", "0"], ["0", "0", "1"], ["1", "0", "0"]]}"#,
    )
    .unwrap();
    let r = json(&["analyze", "--model", rows.to_str().unwrap(), "--transpose"]);
    assert_eq!(r["condition_l"]["verdict"], "Fails");
}
