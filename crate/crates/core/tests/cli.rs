use std::path::Path;
use std::process::{Command, Output};

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk")).args(args).output().expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn verify_passes_and_lists_both_solutions() {
    let out = qwalk(&["verify", "--solver-starts", "200"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    let xis: Vec<f64> =
        text.lines().filter_map(|l| l.strip_prefix("tau solution: xi = ")).map(|v| v.parse().unwrap()).collect();
    let xi = 5f64.sqrt() / 3.0;
    assert_eq!(xis.len(), 2, "{text}");
    assert!((xis[0] - xi).abs() < 1e-8 && (xis[1] + xi).abs() < 1e-8, "{xis:?}");
}

#[test]
fn verify_fault_injection_fails_c2() {
    let out = qwalk(&["verify", "--solver-starts", "20", "--inject-fault", "flip-tau1"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1), "{text}");
    assert!(text.lines().any(|l| l.starts_with("failed: C2")), "{text}");
}

#[test]
fn configuration_errors_exit_2_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("never");
    let out_str = out_dir.to_str().unwrap();
    for args in [
        vec!["run", "--walk", "hexagonal", "--out", out_str],
        vec!["run", "--sigma", "1", "--out", out_str],
        vec!["run", "--eps", "0", "--out", out_str],
        vec!["converge", "--time", "0.3", "--out", out_str],
        vec!["converge", "--n1", "100", "--out", out_str],
        vec!["run", "--bogus-flag"],
        vec!["run", "--config", "/nonexistent/file.cfg"],
    ] {
        let out = qwalk(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(!out_dir.exists());
}

#[test]
fn run_conserves_norm_and_drifts_with_group_velocity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = qwalk(&[
        "run",
        "--walk",
        "honeycomb",
        "--n1",
        "128",
        "--eps",
        "0.05",
        "--sigma",
        "8",
        "--k0",
        "3,4",
        "--steps",
        "40",
        "--out",
        d,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("summary.csv"));
    assert_eq!(header, ["step", "time", "norm", "norm_drift", "mean_x", "mean_y", "spread"]);
    assert_eq!(rows.len(), 41);
    assert!(rows.iter().all(|r| (r[2] - 1.0).abs() < 1e-12 && r[3].abs() < 1e-12));
    let (first, last) = (&rows[0], &rows[40]);
    let (dx, dy) = (last[4] - first[4], last[5] - first[5]);
    let t = last[1];
    // Massless group velocity is k0/|k0| = (0.6, 0.8).
    let speed = dx.hypot(dy) / t;
    let cos = (dx * 0.6 + dy * 0.8) / dx.hypot(dy);
    assert!(cos > 0.99, "direction {dx} {dy}");
    assert!(speed > 0.7 && speed <= 1.0 + 1e-9, "speed {speed}");
    let (fh, field) = read_csv(&dir.path().join("field_final.csv"));
    assert_eq!(fh, ["i", "j", "re_up", "im_up", "re_down", "im_down"]);
    assert_eq!(field.len(), 128 * 128);
}

#[test]
fn triangular_run_writes_edge_fields() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = qwalk(&["run", "--walk", "triangular", "--n1", "24", "--n2", "20", "--steps", "9", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("field_final.csv"));
    assert_eq!(header, ["i", "j", "k", "re_up", "im_up", "re_down", "im_down"]);
    assert_eq!(rows.len(), 24 * 20 * 3);
    let norm: f64 = rows.iter().map(|r| r[3..].iter().map(|x| x * x).sum::<f64>()).sum();
    assert!((norm - 1.0).abs() < 1e-12);
    // Packets start on side-0 edges and return there every third step.
    let off: f64 = rows.iter().filter(|r| r[2] != 0.0).map(|r| r[3..].iter().map(|x| x * x).sum::<f64>()).sum();
    assert!(off < 1e-24, "{off}");
}

#[test]
fn config_file_is_used_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "# small sweep\nwalk = regular\neps-list = 1/8, 1/16, 1/32\nn1 = 128\nsigma = 4\ntime = 1\n")
        .unwrap();
    let d = dir.path().join("out");
    let out = qwalk(&["converge", "--config", cfg.to_str().unwrap(), "--n1", "64", "--out", d.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&d.join("convergence.csv"));
    assert_eq!(header, ["eps", "l2_error", "n", "steps"]);
    assert_eq!(rows.iter().map(|r| r[2]).collect::<Vec<_>>(), [16.0, 32.0, 64.0]);
    assert!(rows.windows(2).all(|w| w[0][0] > w[1][0]));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("convergence.json")).unwrap()).unwrap();
    assert_eq!(json["walk"], "regular");
    let order = json["fitted_order"].as_f64().unwrap();
    assert!((order - 1.0).abs() < 0.25, "{order}");
    assert!(json["fit_residual"].as_f64().unwrap() >= 0.0);
}

#[test]
fn dispersion_table_conventions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out =
        qwalk(&["dispersion", "--walk", "regular", "--eps", "0.1", "--k-max", "12", "--k-count", "9", "--out", d]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("dispersion.csv"));
    assert_eq!(header, ["kx", "ky", "theta_plus", "theta_minus", "omega_continuum_plus", "omega_continuum_minus"]);
    assert_eq!(rows.len(), 81);
    let zero = rows.iter().find(|r| r[0] == 0.0 && r[1] == 0.0).unwrap();
    assert!(zero[2..].iter().all(|x| x.abs() < 1e-12), "{zero:?}");
    assert!(rows.iter().all(|r| r[2].abs() <= std::f64::consts::PI && r[3].abs() <= std::f64::consts::PI));
    for r in &rows {
        let mirror = rows.iter().find(|s| s[0] == -r[0] && s[1] == -r[1]).unwrap();
        assert!((r[2] + mirror[3]).abs() < 1e-10 && (r[3] + mirror[2]).abs() < 1e-10);
    }
}
