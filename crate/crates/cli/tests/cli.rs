use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn willmore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_willmore"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn max_row(rows: &[Vec<f64>], col: usize) -> &Vec<f64> {
    rows.iter().max_by(|a, b| a[col].total_cmp(&b[col])).unwrap()
}

#[test]
fn clifford_energy_json() {
    let o = willmore(&["energy", "--shape", "kind=product a=0.70710678", "--res", "256"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let w = v[0]["willmore"].as_f64().unwrap();
    assert!((w - 2.0 * PI * PI).abs() <= 1e-9);
    assert_eq!(v[0]["n_u"], 256);
}

#[test]
fn tube_profile_minimum_row() {
    let o = willmore(&["tube-profile", "--R", "1.41421356", "--rmin", "0.1", "--rmax", "1.35", "--steps", "1000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("r,W\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1001);
    let best = rows.iter().min_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    assert!((best[0] - 1.0).abs() <= 1e-4);
    assert!((best[1] - 2.0 * PI * PI).abs() <= 1e-6);
}

#[test]
fn sweep_peaks_at_one_half() {
    let o = willmore(&["sweep", "--steps", "101"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 101);
    let top = max_row(&rows, 1);
    assert_eq!(top[0], 0.5);
    assert!((top[1] - 4.0 * PI).abs() <= 1e-10);
}

#[test]
fn spectrum_of_the_clifford_torus() {
    let o = willmore(&["spectrum", "--res", "64", "--count", "24"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["index"], 5);
    assert_eq!(v["nullity"], 4);
    let eig: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(eig.iter().all(|&l| l <= 20.0));
    assert!((eig[0] + 4.0).abs() <= 1e-2);
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--out", p.as_str()]);
    let o = willmore(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let inv = ["invariance", "--shape", "kind=tube R=2 r=1 lift=s3", "--samples", "5", "--seed", "9", "--res", "64"];
    assert_eq!(run_to(dir.path(), "a.csv", &inv), run_to(dir.path(), "b.csv", &inv));
    let fam = ["family", "--per-axis", "5", "--t-steps", "9", "--refine", "50"];
    assert_eq!(run_to(dir.path(), "c.csv", &fam), run_to(dir.path(), "d.csv", &fam));
    let other_seed = ["invariance", "--shape", "kind=tube R=2 r=1 lift=s3", "--samples", "5", "--seed", "10", "--res", "64"];
    assert_ne!(run_to(dir.path(), "a.csv", &inv), run_to(dir.path(), "e.csv", &other_seed));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["energy", "--shape", "kind=tube R=2 r=1", "--shape", "kind=product a=0.6", "--res", "96"];
    let one = Command::new(env!("CARGO_BIN_EXE_willmore"))
        .args(args)
        .env("WILLMORE_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_willmore"))
        .args(args)
        .env("WILLMORE_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn family_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    let summary = dir.path().join("f.json");
    let o = willmore(&[
        "family",
        "--per-axis",
        "5",
        "--t-steps",
        "9",
        "--out",
        csv.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("v1,v2,v3,v4,t,area\n"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(v["certified"], true);
    assert!((v["sup"].as_f64().unwrap() - 2.0 * PI * PI).abs() <= 1e-9);
}

#[test]
fn liyau_and_curves_tables() {
    let o = willmore(&["liyau", "--shape", "kind=product a=0.6"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["holds"], true);
    assert!((v[0]["lambda1_area"].as_f64().unwrap() - 3.0 * PI * PI).abs() <= 1e-9);

    let o = willmore(&["curves", "--curve", "h2 x=0;1,0 y=1.4142135623730951;0,1"]);
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    let bending: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((bending - 4.0 * PI).abs() <= 1e-8);
}

#[test]
fn errors_exit_nonzero() {
    let o = willmore(&["energy", "--shape", "kind=blob"]);
    assert_eq!(o.status.code(), Some(2));
    let o = willmore(&["energy", "--res", "8"]);
    assert_eq!(o.status.code(), Some(2));
    let o = willmore(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    // No flat chart: a numerical precondition failure with a diagnostic record.
    let o = willmore(&["liyau", "--shape", "kind=tube R=2 r=1 lift=s3"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "liyau");
    assert!(v["error"].as_str().unwrap().contains("flat"));
}

#[test]
fn report_exit_status_follows_the_outcomes() {
    let o = willmore(&["report", "--only", "1,7"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("2/2 criteria passed"));
    let o = willmore(&["report", "--only", "12"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("[FAIL] 12"));
}
