//! Exercises the C ABI both from Rust (handle lifecycle, status codes) and
//! from an actual C translation unit compiled against the generated header.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use precs_ffi::*;

fn config_json(output: &std::path::Path) -> CString {
    let json = format!(
        r#"{{
            "model": "pure-dephasing",
            "omega": 1.0,
            "g": 0.2,
            "n_max": 24,
            "grid": {{ "r": 6.0, "h": 0.1 }},
            "integrator": {{ "dt": 0.01, "t_end": 2.0, "samples": 4 }},
            "initial_state": {{ "qubit": "superposition", "env": {{ "coherent": [0.0, 0.0] }} }},
            "output": {}
        }}"#,
        serde_json::to_string(output).unwrap()
    );
    CString::new(json).unwrap()
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe {
        precs_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn config_lifecycle_and_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let json = config_json(dir.path());
    let mut config: *mut PrecsConfig = ptr::null_mut();
    unsafe {
        assert_eq!(
            precs_config_from_json(json.as_ptr(), &mut config),
            PrecsStatus::Ok
        );
        assert!(!config.is_null());

        let mut norm_dev = f64::NAN;
        let mut rec_err = f64::NAN;
        assert_eq!(
            precs_run_decompose(config, &mut norm_dev, &mut rec_err),
            PrecsStatus::Ok
        );
        assert!(norm_dev < 1e-6);
        assert!(rec_err < 1e-5);
        assert!(dir.path().join("field.csv").exists());

        precs_config_free(config);
    }
}

#[test]
fn invalid_json_reports_config_error() {
    let bad = CString::new("{ nope").unwrap();
    let mut config: *mut PrecsConfig = ptr::null_mut();
    unsafe {
        assert_eq!(
            precs_config_from_json(bad.as_ptr(), &mut config),
            PrecsStatus::ConfigError
        );
    }
    assert!(last_error().contains("parse"));
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        assert_eq!(
            precs_config_from_json(ptr::null(), &mut ptr::null_mut()),
            PrecsStatus::NullPointer
        );
        assert_eq!(
            precs_run_decompose(ptr::null(), ptr::null_mut(), ptr::null_mut()),
            PrecsStatus::NullPointer
        );
        let mut len = 0usize;
        assert_eq!(
            precs_trajectory_len(ptr::null(), &mut len),
            PrecsStatus::NullPointer
        );
    }
}

#[test]
fn evolve_returns_a_usable_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let json = config_json(dir.path());
    let engine = CString::new("gksl").unwrap();
    unsafe {
        let mut config: *mut PrecsConfig = ptr::null_mut();
        assert_eq!(
            precs_config_from_json(json.as_ptr(), &mut config),
            PrecsStatus::Ok
        );
        let mut traj: *mut PrecsTrajectory = ptr::null_mut();
        assert_eq!(
            precs_run_evolve(config, engine.as_ptr(), &mut traj),
            PrecsStatus::Ok
        );
        let mut len = 0usize;
        assert_eq!(precs_trajectory_len(traj, &mut len), PrecsStatus::Ok);
        assert_eq!(len, 5);

        let mut row = [0.0_f64; 7];
        assert_eq!(precs_trajectory_row(traj, 0, row.as_mut_ptr()), PrecsStatus::Ok);
        assert_eq!(row[0], 0.0);
        assert!((row[1] - 0.5).abs() < 1e-12);
        assert!((row[3] - 0.5).abs() < 1e-12);

        assert_eq!(
            precs_trajectory_row(traj, 99, row.as_mut_ptr()),
            PrecsStatus::ConfigError
        );

        precs_trajectory_free(traj);
        precs_config_free(config);
    }
    assert!(dir.path().join("trajectory_gksl.csv").exists());
}

#[test]
fn coverage_failure_maps_to_status_3() {
    let dir = tempfile::tempdir().unwrap();
    let json = config_json(dir.path())
        .into_string()
        .unwrap()
        .replace("[0.0, 0.0]", "[3.0, 0.0]")
        .replace("\"r\": 6.0", "\"r\": 3.5")
        .replace("\"n_max\": 24", "\"n_max\": 40");
    let json = CString::new(json).unwrap();
    unsafe {
        let mut config: *mut PrecsConfig = ptr::null_mut();
        assert_eq!(
            precs_config_from_json(json.as_ptr(), &mut config),
            PrecsStatus::Ok
        );
        assert_eq!(
            precs_run_decompose(config, ptr::null_mut(), ptr::null_mut()),
            PrecsStatus::CoverageError
        );
        precs_config_free(config);
    }
}

#[test]
fn rate_helpers_work_without_a_config() {
    let rate = precs_dephasing_rate(1.0, 0.2, std::f64::consts::PI);
    assert!(rate > 0.0);
    assert!(precs_dephasing_rate(-1.0, 0.2, 0.0).is_nan());

    let mut fraction = f64::NAN;
    unsafe {
        assert_eq!(
            precs_subthreshold_fraction(1.0, 8.0, 0.01, 4096, &mut fraction),
            PrecsStatus::Ok
        );
    }
    assert!(fraction > 0.5);
}

/// Compile and run a real C client against the generated header and the
/// cdylib, covering the full round trip through a foreign toolchain.
#[test]
fn c_client_round_trip() {
    let cc = ["cc", "clang", "gcc"]
        .iter()
        .find(|cc|
            Command::new(cc)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success()))
        .copied();
    let Some(cc) = cc else {
        eprintln!("no C compiler available; skipping the C round trip");
        return;
    };

    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = manifest.join("include");
    // The test binary sits in target/<profile>/deps; the cdylib is placed
    // there too, and additionally uplifted to target/<profile> by plain
    // builds. Search both.
    let mut deps_dir = std::env::current_exe().unwrap();
    deps_dir.pop();
    let profile_dir = deps_dir.parent().unwrap().to_path_buf();

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let config_path = dir.path().join("config.json");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &config_path,
        config_json(&out_dir).into_string().unwrap(),
    )
    .unwrap();

    std::fs::write(
        &src,
        r#"
#include "precs.h"
#include <stdio.h>

int main(int argc, char **argv) {
    if (argc < 2) return 10;
    PrecsConfig *config = NULL;
    if (precs_config_from_file(argv[1], &config) != PRECS_STATUS_OK) return 11;

    double norm_dev = -1.0, rec_err = -1.0;
    if (precs_run_decompose(config, &norm_dev, &rec_err) != PRECS_STATUS_OK) return 12;
    if (!(norm_dev < 1e-6) || !(rec_err < 1e-5)) return 13;

    PrecsTrajectory *traj = NULL;
    if (precs_run_evolve(config, "gksl", &traj) != PRECS_STATUS_OK) return 14;
    size_t len = 0;
    if (precs_trajectory_len(traj, &len) != PRECS_STATUS_OK || len == 0) return 15;
    double row[7];
    if (precs_trajectory_row(traj, len - 1, row) != PRECS_STATUS_OK) return 16;
    printf("rows=%zu final_coherence=%.6f\n", len, row[3]);

    precs_trajectory_free(traj);
    precs_config_free(config);
    return 0;
}
"#,
    )
    .unwrap();

    let exe = dir.path().join("client");
    let compile = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(&include_dir)
        .arg("-L")
        .arg(&deps_dir)
        .arg("-L")
        .arg(&profile_dir)
        .arg("-lprecs_ffi")
        .arg(format!("-Wl,-rpath,{}", deps_dir.display()))
        .arg(format!("-Wl,-rpath,{}", profile_dir.display()))
        .arg("-o")
        .arg(&exe)
        .output()
        .expect("compiler invocation");
    assert!(
        compile.status.success(),
        "C compilation failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&exe)
        .arg(&config_path)
        .output()
        .expect("client run");
    assert!(
        run.status.success(),
        "C client exited with {:?}:\n{}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("rows=5"), "unexpected output: {stdout}");
}
