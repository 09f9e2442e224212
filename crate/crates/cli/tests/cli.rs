use std::process::{Command, Output};

use serde_json::Value;

fn wrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wrt"))
        .args(args)
        .env_remove("WRT_PRECISION")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = wrt(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn value(v: &Value) -> (f64, f64) {
    let z = &v["value"];
    (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sphere_is_inverse_total_dimension() {
    for k in 1..6 {
        let v = ok_json(&["rt", "s3", "-k", &k.to_string()]);
        let n = f64::from(k + 2);
        let expected = (2.0 / n).sqrt() * (std::f64::consts::PI / n).sin();
        let (re, im) = value(&v);
        assert!((re - expected).abs() < 1e-14 && im == 0.0, "k={k}: {re} {im}");
    }
}

#[test]
fn s1xs2_is_one() {
    let (re, im) = value(&ok_json(&["rt", "s1xs2", "-k", "4"]));
    assert!((re - 1.0).abs() < 1e-14 && im.abs() < 1e-14);
}

#[test]
fn values_carry_precision_digits() {
    let v = ok_json(&["rt", "lens:5,2", "-k", "3", "--precision", "40"]);
    let re = v["value"][0].to_string();
    let mantissa = re.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
    assert_eq!(mantissa.len(), 40, "{re}");
    assert_eq!(v["precision"], 40);
}

#[test]
fn poincare_plumbings_agree() {
    let e8 = ok_json(&["rt", "poincare", "-k", "2"]);
    let star = ok_json(&["rt", "poincare_star", "-k", "2"]);
    let (a, b) = (value(&e8), value(&star));
    assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14, "{a:?} vs {b:?}");
    assert_eq!(e8["b1"], 0);
}

#[test]
fn plumbing_file_matches_shorthand() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l52.json");
    std::fs::write(&path, r#"{"vertices":[{"id":0,"framing":3},{"id":1,"framing":2}],"edges":[[0,1]]}"#).unwrap();
    let file = ok_json(&["rt", &format!("@{}", path.display()), "-k", "5"]);
    let short = ok_json(&["rt", "lens:5,2", "-k", "5"]);
    assert_eq!(file["value"], short["value"]);
}

#[test]
fn raw_matrix_needs_u1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"matrix":[[-3,1],[1,-2]]}"#).unwrap();
    let arg = format!("@{}", path.display());
    assert_eq!(wrt(&["rt", &arg, "-k", "4"]).status.code(), Some(2));
    let v = ok_json(&["rt", &arg, "-k", "4", "--family", "u1"]);
    assert!(v["value"][0].is_number());
}

#[test]
fn input_errors_exit_2() {
    for args in [
        &["rt", "lens:3", "-k", "2"][..],
        &["rt", "s3", "-k", "0"],
        &["rt", "s3", "-k", "2", "--precision", "14"],
        &["mtc-table", "-k", "3", "--family", "u1"],
        &["check", "nonsense"],
        &["sweep", "s3", "--k", "9..4"],
        &["rt", "@/nonexistent/file.json", "-k", "2"],
        &["borel"],
    ] {
        let out = wrt(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn flag_precision_overrides_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_wrt"));
        c.args(["rt", "s3", "-k", "3"]);
        if let Some(f) = flag {
            c.args(["--precision", f]);
        }
        match env {
            Some(e) => c.env("WRT_PRECISION", e),
            None => c.env_remove("WRT_PRECISION"),
        };
        let v: Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        v["precision"].as_u64().unwrap()
    };
    assert_eq!(run(None, None), 30);
    assert_eq!(run(Some("50"), None), 50);
    assert_eq!(run(Some("50"), Some("20")), 20);
}

#[test]
fn checks_pass_and_report() {
    let out = wrt(&["check", "modular", "-k", "1..5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["suite"], "modular");
    assert_eq!(v[0]["passed"], v[0]["total"]);
    for suite in ["verlinde", "fusion"] {
        assert_eq!(wrt(&["check", suite, "-k", "1..6"]).status.code(), Some(0), "{suite}");
    }
}

#[test]
fn mtc_table_shapes() {
    let v = ok_json(&["mtc-table", "-k", "4"]);
    assert_eq!(v["labels"].as_array().unwrap().len(), 5);
    assert_eq!(v["s"].as_array().unwrap().len(), 5);
    let csv = stdout(&wrt(&["mtc-table", "-k", "2", "--format", "csv"]));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("i,j,Re S,Im S"));
    assert_eq!(lines.count(), 9);
    let u1 = ok_json(&["mtc-table", "-k", "6", "--family", "u1"]);
    assert_eq!(u1["labels"].as_array().unwrap().len(), 6);
}

#[test]
fn sweep_spectrum_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("l31.csv");
    let out = wrt(&["sweep", "lens:3,1", "--k", "20..276", "--format", "csv", "-o", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("k,Re Z,Im Z"));
    assert_eq!(text.lines().count(), 258);

    let from_file = ok_json(&["spectrum", csv.to_str().unwrap()]);
    let direct = ok_json(&["spectrum", "lens:3,1", "--k", "20..276"]);
    assert_eq!(from_file["window"], serde_json::json!([20, 276]));
    let peaks = direct["peaks"].as_array().unwrap();
    assert!(!peaks.is_empty() && peaks.len() <= 2, "{direct}");
    assert_eq!(from_file["peaks"], direct["peaks"]);
}

#[test]
fn sweeps_do_not_depend_on_threads() {
    let one = stdout(&wrt(&["sweep", "lens:5,2", "--k", "2..120", "--format", "csv", "--threads", "1"]));
    let many = stdout(&wrt(&["sweep", "lens:5,2", "--k", "2..120", "--format", "csv", "--threads", "4"]));
    assert!(one.lines().count() > 100);
    assert_eq!(one, many);
}

#[test]
fn synthetic_borel_pole() {
    let v = ok_json(&["borel", "--synthetic", "factorial", "--terms", "20", "--cs", "0,1/2"]);
    let poles = v["poles"].as_array().unwrap();
    assert_eq!(poles.len(), 1);
    let loc = &poles[0]["loc"];
    assert!((loc[0].as_f64().unwrap() - 1.0).abs() < 1e-6 && loc[1].as_f64().unwrap().abs() < 1e-6);
    assert_eq!(v["matches"][0]["matched"], true);

    let shifted = ok_json(&["borel", "--synthetic", "factorial", "--omega=-2,1"]);
    let loc = &shifted["poles"][0]["loc"];
    assert!((loc[0].as_f64().unwrap() + 2.0).abs() < 1e-6 && (loc[1].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn series_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let coeffs: Vec<[f64; 2]> = (0..16).map(|n| [(1..=n).map(f64::from).product::<f64>() * 0.5f64.powi(n), 0.0]).collect();
    let series = serde_json::json!({ "coeffs": coeffs, "variable": "hbar" });
    std::fs::write(&path, series.to_string()).unwrap();
    let v = ok_json(&["borel", "--series", path.to_str().unwrap(), "--terms", "16"]);
    let loc = &v["poles"][0]["loc"];
    assert!((loc[0].as_f64().unwrap() - 2.0).abs() < 1e-6, "{v}");
}
