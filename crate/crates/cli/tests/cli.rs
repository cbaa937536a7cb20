use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qbtransfer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbtransfer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn figure(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../figures")
        .join(name)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|x| {
                    if x.is_empty() {
                        f64::NAN
                    } else {
                        x.parse().unwrap()
                    }
                })
                .collect()
        })
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[k]).collect()
}

#[test]
fn run_fig4a_charges_the_battery() {
    let out = tempfile::tempdir().unwrap();
    let o = qbtransfer(&[
        "run",
        "--config",
        figure("fig4a.json").to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--quiet",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let (header, rows) = csv(&out.path().join("trajectory.csv"));
    assert_eq!(
        header.join(","),
        "t,e_c,e_b,e_m,e_int,p,w_integral,w_conservation,norm,n_exc"
    );
    let t = column(&header, &rows, "t");
    let e_b = column(&header, &rows, "e_b");
    let at_off = t.iter().position(|&s| s >= 64.5).unwrap();
    assert!(e_b[at_off] > 0.99, "{}", e_b[at_off]);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("summary.json")).unwrap())
            .unwrap();
    for key in [
        "model",
        "alpha",
        "g",
        "n_initial",
        "tau_used",
        "t0",
        "e_b_max",
        "t_b_max",
        "e_c_bar",
        "w_final",
        "solver",
    ] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary["tau_used"], 32.0);
    assert!(summary["solver"]["converged"].as_bool().unwrap());
    assert!(summary["metadata"]["generated_unix_s"].is_u64());
}

#[test]
fn run_without_tau_reports_tuned_tau() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": "direct", "alpha": 0.8, "g": 0.05, "switch": {"t0": 0.1}}"#,
    );
    let out = dir.path().join("out");
    let o = qbtransfer(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(o.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let tau = summary["tau_used"].as_f64().unwrap();
    assert!((13.5..=15.0).contains(&tau), "{tau}");
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for body in [
        "{not json",
        r#"{"model": "direct", "unknown_key": 1}"#,
        r#"{"model": "direct", "alpha": 0}"#,
        r#"{"model": "direct", "omega_b": 2.0}"#,
    ] {
        let cfg = write_config(dir.path(), body);
        let o = qbtransfer(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(2), "{body}");
        assert!(!out.exists(), "{body}");
    }
    let o = qbtransfer(&[
        "run",
        "--config",
        dir.path().join("missing.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn dt_step_that_does_not_divide_the_sample_interval_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = qbtransfer(&[
        "run",
        "--config",
        figure("fig4b.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--dt-step",
        "0.03",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn t_end_override_sets_the_horizon() {
    let out = tempfile::tempdir().unwrap();
    let o = qbtransfer(&[
        "run",
        "--config",
        figure("fig4b.json").to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--t-end",
        "40",
        "--quiet",
    ]);
    assert!(o.status.success());
    let (header, rows) = csv(&out.path().join("trajectory.csv"));
    let t = column(&header, &rows, "t");
    assert!((t.last().unwrap() - 40.0).abs() < 1e-12);
}

#[test]
fn empty_sweep_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": "cavity", "alpha": 0.8, "sweep": {"variable": "n", "values": []}}"#,
    );
    let out = dir.path().join("out");
    let o = qbtransfer(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.join("sweep.csv").exists());
}

#[test]
fn photon_sweep_one_to_ten() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": "cavity", "alpha": 0.8, "g": 0.05, "switch": {"t0": 0.1},
            "sweep": {"variable": "n", "values": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 10, 3]}}"#,
    );
    let out = dir.path().join("out");
    let o = qbtransfer(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate"));
    let (header, rows) = csv(&out.join("sweep.csv"));
    assert_eq!(
        header.join(","),
        "value,e_b_max,t_b_max,sqrt_n_t,e_c_bar,tau_used"
    );
    assert_eq!(rows.len(), 10);
    let e = column(&header, &rows, "e_b_max");
    assert!(e.windows(2).all(|w| w[1] >= w[0]), "{e:?}");
    assert!(!out.join("sweep_failures.json").exists());
}

#[test]
fn alpha_sweep_leaves_sqrt_n_t_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": "direct", "sweep": {"variable": "alpha", "values": [0.8, 1.0]}}"#,
    );
    let out = dir.path().join("out");
    let o = qbtransfer(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').nth(3), Some(""));
    }
}

#[test]
fn profile_fig3a() {
    let out = tempfile::tempdir().unwrap();
    let o = qbtransfer(&[
        "profile",
        "--config",
        figure("fig3a.json").to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--quiet",
    ]);
    assert!(o.status.success());
    let (header, rows) = csv(&out.path().join("profile.csv"));
    assert_eq!(header.join(","), "t,u,u_dot");
    for r in &rows {
        let (t, u) = (r[0], r[1]);
        if (51.0..=99.0).contains(&t) {
            assert!((u - 1.0).abs() < 1e-10, "t = {t}");
        }
        if !(49.0..=101.0).contains(&t) {
            assert!(u.abs() < 1e-10, "t = {t}");
        }
    }
}

#[test]
fn profile_fig6a_endpoints() {
    let out = tempfile::tempdir().unwrap();
    let o = qbtransfer(&[
        "profile",
        "--config",
        figure("fig6a_alpha02.json").to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--quiet",
    ]);
    assert!(o.status.success());
    let (_, rows) = csv(&out.path().join("profile.csv"));
    assert!((rows[0][1] - 0.2).abs() < 1e-12);
    assert!((rows.last().unwrap()[1] - 0.2).abs() < 1e-12);
    let mid = rows.iter().find(|r| r[0] >= 21.0).unwrap();
    assert!((mid[1] - 1.0).abs() < 1e-12);
}

#[test]
fn profile_without_tau_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": "direct", "profile": {"kind": "interaction_f", "t_end": 10}}"#,
    );
    let o = qbtransfer(&[
        "profile",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tune_tau_prints_tau() {
    let dir = tempfile::tempdir().unwrap();
    let o = qbtransfer(&[
        "tune-tau",
        "--config",
        figure("fig4a.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--quiet",
    ]);
    assert!(o.status.success());
    let tau: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!((31.0..=33.0).contains(&tau));
    assert!(dir.path().join("tune_tau.json").exists());
}

#[test]
fn zero_coupling_tuning_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"model": "direct", "g": 0.0}"#);
    let o = qbtransfer(&[
        "tune-tau",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn identical_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = qbtransfer(&[
            "run",
            "--config",
            figure("fig4d.json").to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
            "--quiet",
        ]);
        assert!(o.status.success());
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("trajectory.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}
