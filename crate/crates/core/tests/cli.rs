use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use offdiag::cli_io::{matrix_to_json, read_matrix, write_matrix};
use offdiag::experiments::ExperimentReport;
use offdiag::matrix_core::{DecayMatrix, IndexGeometry};
use tempfile::TempDir;

fn offdiag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offdiag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/experiments").join(name)
}

fn write_identity(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("id.json");
    write_matrix(&path, &DecayMatrix::identity(IndexGeometry::torus(9, 1).unwrap())).unwrap();
    path
}

fn decaying(g: IndexGeometry) -> DecayMatrix {
    DecayMatrix::toeplitz(g, |m| Complex64::new((1.0 + m[0].abs() as f64).powi(-3), 0.0))
}

#[test]
fn norm_of_identity_is_one() {
    let dir = TempDir::new().unwrap();
    let id = write_identity(&dir);
    for tag in ["jaffard:2", "schur:1", "cd:0", "opl2", "weighted:cd:0:poly:2"] {
        let o = offdiag(&["norm", "--in", p(&id), "--norm", tag]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(stdout(&o).parse::<f64>().unwrap(), 1.0, "{tag}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let id = write_identity(&dir);
    let bad_tag = offdiag(&["norm", "--in", p(&id), "--norm", "jaffard:-1"]);
    assert_eq!(bad_tag.status.code(), Some(2));
    assert!(stderr(&bad_tag).contains("position 8"), "{}", stderr(&bad_tag));
    let unknown_flag = offdiag(&["norm", "--in", p(&id), "--norm", "cd:0", "--bogus"]);
    assert_eq!(unknown_flag.status.code(), Some(2));
    let missing = offdiag(&["norm", "--in", p(&dir.path().join("nope.json")), "--norm", "cd:0"]);
    assert_eq!(missing.status.code(), Some(2));
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"geometry\": 3}").unwrap();
    let o = offdiag(&["invert", "--in", p(&garbage), "--out", p(&dir.path().join("x.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = offdiag(&["approx", "--in", p(&id), "--out", p(&dir.path().join("a.csv")), "--norm", "cd:0", "--max-band", "99"]);
    assert_eq!(o.status.code(), Some(2));
    let o = offdiag(&["approx", "--in", p(&id), "--out", p(&dir.path().join("a.csv")), "--norm", "cd:0", "--metric", "two"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn singular_inverse_exits_one() {
    let dir = TempDir::new().unwrap();
    let g = IndexGeometry::torus(5, 1).unwrap();
    let ones = DecayMatrix::from_fn(g, |_, _| Complex64::new(1.0, 0.0));
    let input = dir.path().join("ones.json");
    write_matrix(&input, &ones).unwrap();
    let o = offdiag(&["invert", "--in", p(&input), "--out", p(&dir.path().join("inv.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("singular"), "{}", stderr(&o));
}

#[test]
fn invert_writes_the_inverse() {
    let dir = TempDir::new().unwrap();
    let g = IndexGeometry::torus(11, 1).unwrap();
    let a = decaying(g);
    let input = dir.path().join("a.json");
    let out = dir.path().join("inv.json");
    write_matrix(&input, &a).unwrap();
    let o = offdiag(&["--quiet", "invert", "--in", p(&input), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let inv = read_matrix(&out).unwrap();
    let prod = a.multiply(&inv).unwrap();
    assert!(prod.max_abs_diff(&DecayMatrix::identity(g)) < 1e-12);
}

#[test]
fn profile_csv_is_ordered_and_stable() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.json");
    write_matrix(&input, &decaying(IndexGeometry::torus(7, 1).unwrap())).unwrap();
    let out1 = dir.path().join("p1.csv");
    let out2 = dir.path().join("p2.csv");
    for out in [&out1, &out2] {
        let o = offdiag(&["profile", "--in", p(&input), "--out", p(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&out1).unwrap();
    assert_eq!(text, std::fs::read_to_string(&out2).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m_1,value");
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[1], format!("-3,{}", 4f64.powi(-3)));
    assert_eq!(lines[4], "0,1");
}

#[test]
fn approx_writes_errors_and_jackson_rows() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.json");
    write_matrix(&input, &decaying(IndexGeometry::torus(33, 1).unwrap())).unwrap();
    let out = dir.path().join("errs.csv");
    let o = offdiag(&[
        "approx", "--in", p(&input), "--out", p(&out), "--norm", "jaffard:1", "--max-band", "5",
        "--r", "2", "--p", "inf", "--grid-levels", "8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // E_N = (N+2)^{-2} for N < 16 and E_16 = 0, so the sup sits at N = 15
    let printed: f64 = stdout(&o).parse().unwrap();
    assert!((printed - (16.0f64 / 17.0).powi(2)).abs() < 1e-12, "{printed}");
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,E_N,norm_tag,flag");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].ends_with(",jaffard:1,exact"), "{}", lines[1]);
    let jackson = std::fs::read_to_string(dir.path().join("errs_jackson.csv")).unwrap();
    assert!(jackson.starts_with("n,vdp_error,modulus_estimate\n1,"), "{jackson}");
}

#[test]
fn hz_prints_norm_and_probe_table() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a.json");
    write_matrix(&input, &decaying(IndexGeometry::window(6, 1).unwrap())).unwrap();
    let out = dir.path().join("hz.csv");
    let o = offdiag(&["hz", "--in", p(&input), "--out", p(&out), "--norm", "cd:0", "--r", "1.5", "--grid-levels", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let value: f64 = stdout(&o).parse().unwrap();
    assert!(value.is_finite() && value > 1.0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("alpha,t_1,t_norm1,value,scaled\n(1),"), "{text}");
    // 24 targeted probes plus 7 dyadic ones for the single first-order derivation
    assert_eq!(text.lines().count(), 1 + 24 + 7);
}

#[test]
fn generate_from_flags_and_spec() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.json");
    let o = offdiag(&["generate", "--geometry", "torus:17", "--d", "1", "--r", "2", "--seed", "3", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = read_matrix(&out).unwrap();
    assert_eq!(a.geometry(), &IndexGeometry::torus(17, 1).unwrap());

    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"geometry":{"kind":"torus","d":1,"size":9},"kind":"gamma","r":1.5}"#).unwrap();
    let out2 = dir.path().join("gamma.json");
    let o = offdiag(&["generate", "--config", p(&spec), "--out", p(&out2)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let gamma = read_matrix(&out2).unwrap();
    assert_eq!(gamma.max_abs(), 1.0);

    let o = offdiag(&["generate", "--geometry", "torus:16", "--r", "2", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = offdiag(&["generate", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn matrix_files_round_trip_through_the_binary() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.json");
    let o = offdiag(&["generate", "--geometry", "window:3", "--d", "2", "--r", "3", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = read_matrix(&out).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.trim_end(), matrix_to_json(&a).unwrap());
}

#[test]
fn experiment_writes_a_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = offdiag(&["experiment", "--config", p(&fixture("jaffard_default.json")), "--out", p(&out), "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.pass);
    assert_eq!(report.kind, "jaffard");
    assert_eq!(report.spec["seeds"], serde_json::json!([4]));
    assert!(report.fits.contains_key("seed4.inverse"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"jaffard","epsilon":1.5}"#).unwrap();
    let o = offdiag(&["experiment", "--config", p(&bad), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}
