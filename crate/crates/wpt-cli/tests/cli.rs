//! End-to-end checks of the `wpt` binary: flag handling, exit codes and
//! output determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpt"))
        .args(args)
        .env_remove("WPT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn estimate_inverts_reference_impedance() {
    let out = wpt(&["estimate", "--zin-mag", "9.154", "--freq", "72537"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let m_line = text
        .lines()
        .find(|l| l.starts_with("M_est"))
        .expect("M_est line");
    let value: f64 = m_line
        .split('=')
        .nth(1)
        .and_then(|s| s.trim().split(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 10e-6).abs() < 1e-8, "M = {value}");
}

#[test]
fn estimate_supports_phase_and_amplitude_inputs() {
    // amplitude pair instead of --zin-mag, plus the phase-angle route at a
    // point where the input impedance of M = 10 uH is 9.4329 ohm at 10.2 mrad
    let out = wpt(&[
        "estimate",
        "--v-amp",
        "10",
        "--i1-amp",
        "1.06012",
        "--freq",
        "76000",
        "--zin-phase",
        "0.010232385186774627",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("|I2|_est"), "missing estimate:\n{text}");
    let phase_line = text
        .lines()
        .find(|l| l.contains("phase method"))
        .expect("phase-method line");
    let value: f64 = phase_line
        .split('=')
        .nth(1)
        .and_then(|s| s.trim().split(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 10e-6).abs() < 1e-9, "phase-method M = {value}");
}

#[test]
fn invalid_coupling_exits_one_naming_field() {
    let out = wpt(&["sweep", "--k", "1.5", "--out-dir", "/tmp/wpt-na"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains('k') && err.contains("0.99"), "stderr: {err}");
}

#[test]
fn inconsistent_measurement_exits_two() {
    let out = wpt(&["estimate", "--zin-mag", "1.0", "--freq", "72537"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("inconsistent"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn missing_estimate_inputs_exit_one() {
    let out = wpt(&["estimate", "--freq", "72537"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("zin_mag"), "stderr: {}", stderr(&out));
}

#[test]
fn help_lists_flags_with_units() {
    for sub in ["sweep", "surface", "estimate", "adapt", "compare", "all"] {
        let out = wpt(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub} --help failed");
        let text = stdout(&out);
        assert!(
            text.contains("<HZ>"),
            "{sub} help lacks frequency units:\n{text}"
        );
        assert!(text.contains("--config"), "{sub} help lacks --config");
    }
    let est = stdout(&wpt(&["estimate", "--help"]));
    assert!(
        est.contains("<OHM>") && est.contains("<RAD>"),
        "estimate units:\n{est}"
    );
}

#[test]
fn sweep_is_repeatable_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let d1 = dir.path().join("a");
    let d2 = dir.path().join("b");
    for d in [&d1, &d2] {
        let out = wpt(&[
            "sweep",
            "--k",
            "0.4",
            "--points",
            "751",
            "--out-dir",
            d.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    let a = fs::read(d1.join("sweep_0.40.csv")).unwrap();
    let b = fs::read(d2.join("sweep_0.40.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn config_file_feeds_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "# reference circuit, narrow grid\nk_list = 0.3\npoints = 751\nf_min = 60e3\nf_max = 90e3\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = wpt(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(out_dir.join("sweep_0.30.csv").exists());
    assert!(
        !out_dir.join("sweep_0.10.csv").exists(),
        "k_list override ignored"
    );

    // flags win over the file
    let out2_dir = dir.path().join("out2");
    let out = wpt(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--k",
        "0.5",
        "--out-dir",
        out2_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out2_dir.join("sweep_0.50.csv").exists());
}

#[test]
fn bad_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "inductance = 3\n").unwrap();
    let out = wpt(&["sweep", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("inductance"));
}

#[test]
fn out_dir_env_variable_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_wpt"))
        .args(["sweep", "--k", "0.2", "--points", "751"])
        .env("WPT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(dir.path().join("sweep_0.20.csv").exists());
}

#[test]
fn compare_prints_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = wpt(&["compare", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("improvement"), "table missing:\n{text}");
    assert!(text.contains("0.90"), "k column missing:\n{text}");
    assert!(Path::new(&dir.path().join("compare.csv")).exists());
}

#[test]
fn unwritable_output_directory_exits_two() {
    let out = wpt(&[
        "sweep",
        "--k",
        "0.2",
        "--points",
        "751",
        "--out-dir",
        "/proc/no-such/x",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}
