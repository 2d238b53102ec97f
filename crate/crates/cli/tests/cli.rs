use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn wallcross(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wallcross")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn geometry(euler: i64, t: &str) -> String {
    format!(
        r#"{{"euler_number": {euler}, "divisor_rank": 1, "curve_rank": 1,
            "triple_intersection": {t}, "divisor_curve_pairing": [[1]], "omega": [1]}}"#
    )
}

/// `prod (1 - q^k)^{-k}` squared, with `q -> -q`, by direct integer expansion.
fn macmahon_minus_q_squared(deg: usize) -> Vec<i64> {
    let mut m = vec![0i64; deg + 1];
    m[0] = 1;
    for k in 1..=deg {
        for _ in 0..k {
            for n in k..=deg {
                m[n] += m[n - k];
            }
        }
    }
    let mut sq = vec![0i64; deg + 1];
    for i in 0..=deg {
        for j in 0..=deg - i {
            sq[i + j] += m[i] * m[j];
        }
    }
    sq.iter().enumerate().map(|(k, c)| if k % 2 == 1 { -c } else { *c }).collect()
}

#[test]
fn geometry_validation() {
    let dir = TempDir::new().unwrap();
    let ok = write(&dir, "ok.json", &geometry(-200, "[[[5]]]"));
    let o = wallcross(&["geometry", "validate", "--geometry", s(&ok)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("w^3 = 5"));

    let flat = write(&dir, "flat.json", &geometry(-200, "[[[0]]]"));
    assert_eq!(wallcross(&["geometry", "validate", "--geometry", s(&flat)]).status.code(), Some(1));

    let float = write(&dir, "float.json", &geometry(-200, "[[[5.0]]]"));
    let o = wallcross(&["geometry", "validate", "--geometry", s(&float)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error"));

    let asym = write(
        &dir,
        "asym.json",
        r#"{"euler_number": 0, "divisor_rank": 2, "curve_rank": 2,
            "triple_intersection": [[[1,2],[0,1]],[[2,1],[1,1]]],
            "divisor_curve_pairing": [[1,0],[0,1]], "omega": [1,1]}"#,
    );
    assert_eq!(wallcross(&["geometry", "validate", "--geometry", s(&asym)]).status.code(), Some(1));
}

#[test]
fn dtpt_rank_one_row_is_macmahon() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", &geometry(2, "[[[5]]]"));
    let pt = write(&dir, "pt.csv", "two_beta_1,six_n,value\n0,0,1\n");
    let out = dir.path().join("dt.csv");
    let o = wallcross(&[
        "dtpt", "--geometry", s(&g), "--rank", "1", "--div", "0", "--max-sixn", "60", "--in", s(&pt), "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut expected = String::from("two_beta_1,six_n,value\n");
    for (k, c) in macmahon_minus_q_squared(10).iter().enumerate() {
        expected.push_str(&format!("0,{},{c}\n", 6 * k));
    }
    assert_eq!(fs::read_to_string(&out).unwrap(), expected);
    let report = fs::read_to_string(dir.path().join("dt.csv.report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["paths"]["agree"], true);
}

#[test]
fn dtpt_identity_at_zero_euler_number_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let g0 = write(&dir, "g0.json", &geometry(0, "[[[5]]]"));
    let table = "two_beta_1,six_n,value\n-2,7,3/4\n0,-6,-1\n4,12,5\n";
    let pt = write(&dir, "pt.csv", table);
    let args = |geo: &Path, extra: &[&str]| {
        let mut v = vec!["dtpt", "--geometry", s(geo), "--rank", "2", "--div", "1", "--in", s(&pt)];
        v.extend_from_slice(extra);
        v.into_iter().map(String::from).collect::<Vec<_>>()
    };
    let run = |a: Vec<String>| wallcross(&a.iter().map(String::as_str).collect::<Vec<_>>());
    let o = run(args(&g0, &[]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), table);

    let g = write(&dir, "g.json", &geometry(-200, "[[[5]]]"));
    let dt = dir.path().join("dt.csv");
    let o = run(args(&g, &["--out", s(&dt)]));
    assert!(o.status.success(), "{}", stderr(&o));
    let o = wallcross(&["dtpt", "--inverse", "--geometry", s(&g), "--rank", "2", "--div", "1", "--min-sixn", "-6", "--in", s(&dt)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), table);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", &geometry(-200, "[[[5]]]"));
    let pt = write(&dir, "pt.csv", "two_beta_1,six_n,value\n0,0,2\n2,-3,1/7\n");
    let args = ["dtpt", "--geometry", s(&g), "--rank", "3", "--div", "1", "--in", s(&pt)];
    let a = wallcross(&args);
    let b = wallcross(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn bad_inputs_are_refused() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", &geometry(-200, "[[[5]]]"));
    let pt = write(&dir, "pt.csv", "two_beta_1,six_n,value\n0,0,1\n");
    let o = wallcross(&["dtpt", "--geometry", s(&g), "--rank", "5", "--div", "1", "--in", s(&pt)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gcd"), "{}", stderr(&o));

    for bad in ["two_beta_1,six_n,value\n0,0,0.5\n", "two_beta_1,six_n,value\n0,0,1e2\n", "beta,n,value\n0,0,1\n"] {
        let p = write(&dir, "bad.csv", bad);
        let o = wallcross(&["dtpt", "--geometry", s(&g), "--rank", "1", "--div", "0", "--in", s(&p)]);
        assert_eq!(o.status.code(), Some(1), "{bad}");
    }
}

#[test]
fn ptl_round_trip_through_files() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", &geometry(-200, "[[[5]]]"));
    let n = write(&dir, "n.csv", "two_beta_1,six_n,value\n2,6,1/2\n2,12,-1\n4,0,3\n");
    let l_table = "two_beta_1,six_n,value\n0,-5,1\n0,0,2\n2,3,-1/3\n";
    let l = write(&dir, "l.csv", l_table);
    let pt = dir.path().join("pt.csv");
    let common = ["--geometry", s(&g), "--rank", "2", "--div", "1", "--max-wb", "4", "--max-sixn", "48", "--ntable", s(&n)];
    let mut fwd = vec!["ptl", "--inverse", "--in", s(&l), "--out", s(&pt)];
    fwd.extend_from_slice(&common);
    let o = wallcross(&fwd);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("pt.csv.report.json")).unwrap()).unwrap();
    assert_eq!(report["adjoint_path_agrees"], true);

    let mut back = vec!["ptl", "--in", s(&pt), "--min-sixn", "-5"];
    back.extend_from_slice(&common);
    let o = wallcross(&back);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), l_table);
}

#[test]
fn macmahon_and_nzero() {
    let o = wallcross(&["macmahon", "--qdeg", "11"]);
    assert!(o.status.success());
    let coeffs: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.split(',').nth(1).unwrap().to_string()).collect();
    assert_eq!(coeffs, ["1", "1", "3", "6", "13", "24", "48", "86", "160", "282", "500", "859"]);

    let o = wallcross(&["nzero", "--euler", "24", "--qdeg", "2"]);
    assert!(o.status.success());
    // -e sigma_2(n) / n^2
    assert_eq!(stdout(&o), "two_beta_1,six_n,value\n0,6,-24\n0,12,-30\n");
}

#[test]
fn rationality_exit_codes() {
    let dir = TempDir::new().unwrap();
    let mut geo = String::from("two_beta_1,six_n,value\n");
    for k in 0..30 {
        geo.push_str(&format!("2,{},{}\n", 6 * k, 1i64 << k));
    }
    let p = write(&dir, "geo.csv", &geo);
    let out = dir.path().join("form.json");
    let o = wallcross(&["rationality", "--in", s(&p), "--heldout", "10", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let form: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(form["denominator"], serde_json::json!(["1", "-2"]));
    assert_eq!(form["numerator"], serde_json::json!(["1"]));
    assert_eq!(form["laurent"], serde_json::json!([[0, "1"]]));

    // too little data for any order
    let short = write(&dir, "short.csv", "two_beta_1,six_n,value\n2,0,1\n2,6,3\n2,12,4\n");
    let o = wallcross(&["rationality", "--in", s(&short), "--heldout", "0"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("inconclusive"));

    let missing = dir.path().join("missing.csv");
    assert_eq!(wallcross(&["rationality", "--in", s(&missing)]).status.code(), Some(1));

    let zero = write(&dir, "zero.csv", "two_beta_1,six_n,value\n");
    let o = wallcross(&["rationality", "--in", s(&zero), "--heldout", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let form: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(form["numerator"], serde_json::json!([]));
    assert_eq!(form["laurent"], serde_json::json!([[0, "1"]]));
}

#[test]
fn selftest_matrix() {
    let o = wallcross(&["selftest", "--cases", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("12 of 12 suites pass"));

    let o = wallcross(&["selftest", "--max-wb", "0", "--max-sixn", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches("degenerate window").count(), 12);

    let o = wallcross(&["selftest", "--cases", "3", "--inject-sign-flip"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let failing: Vec<&str> = text.lines().filter(|l| l.contains("FAIL")).collect();
    assert_eq!(failing.len(), 1);
    assert!(failing[0].starts_with("bracket-agreement"));
}
