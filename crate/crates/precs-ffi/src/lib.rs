//! C ABI over the precs library.
//!
//! Conventions:
//! - every fallible call returns a [`PrecsStatus`]; 0 is success and the
//!   nonzero codes mirror the CLI exit codes (1 I/O, 2 config, 3
//!   coverage/truncation, 4 numeric contract);
//! - handles are created through out-parameters and released with the
//!   matching `_free` function; passing a handle after freeing it is
//!   undefined behavior, passing NULL where a handle is expected is not
//!   (it yields `PRECS_STATUS_NULL_POINTER`);
//! - the message of the most recent error is kept per thread and can be
//!   copied out with [`precs_last_error`].
//!
//! The C header is generated into `include/precs.h` at build time.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::Path;

use precs_core::cli::{
    cmd_decompose, cmd_evolve_rows, cmd_gamma_curve, cmd_lindblad_field, Engine,
};
use precs_core::config::RunConfig;
use precs_core::error::Error;
use precs_core::models::{strong_coupling_report, PureDephasingModel};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecsStatus {
    Ok = 0,
    IoError = 1,
    ConfigError = 2,
    CoverageError = 3,
    NumericError = 4,
    NullPointer = 5,
    InvalidUtf8 = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: Vec<u8> = msg.bytes().filter(|&b| b != 0).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(err: &Error) -> PrecsStatus {
    set_error(&err.to_string());
    match err.exit_code() {
        1 => PrecsStatus::IoError,
        2 => PrecsStatus::ConfigError,
        3 => PrecsStatus::CoverageError,
        _ => PrecsStatus::NumericError,
    }
}

fn null_pointer(what: &str) -> PrecsStatus {
    set_error(&format!("null pointer: {what}"));
    PrecsStatus::NullPointer
}

unsafe fn utf8_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, PrecsStatus> {
    if ptr.is_null() {
        return Err(null_pointer(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        PrecsStatus::InvalidUtf8
    })
}

/// Opaque run-configuration handle.
pub struct PrecsConfig {
    inner: RunConfig,
}

/// Opaque trajectory handle: rows of
/// (t, ρ_++, ρ_−−, Re ρ_+−, Im ρ_+−, trace_dev, min_eig).
pub struct PrecsTrajectory {
    rows: Vec<[f64; 7]>,
}

/// Copy the most recent error message on this thread into `buf` (always
/// NUL-terminated, truncated to `cap` bytes). Returns the full length of the
/// message including the terminator; call with `cap` 0 to size a buffer.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be NULL when `cap`
/// is 0.
#[no_mangle]
pub unsafe extern "C" fn precs_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            // Guarantee termination even when truncating.
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Parse and validate a JSON run configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer; on
/// success `*out` owns a handle that must be released with
/// [`precs_config_free`].
#[no_mangle]
pub unsafe extern "C" fn precs_config_from_json(
    json: *const c_char,
    out: *mut *mut PrecsConfig,
) -> PrecsStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    let text = match utf8_arg(json, "json") {
        Ok(t) => t,
        Err(status) => return status,
    };
    match RunConfig::from_json(text) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(PrecsConfig { inner }));
            PrecsStatus::Ok
        }
        Err(err) => fail(&err),
    }
}

/// Load and validate a JSON run configuration from a file.
///
/// # Safety
/// As for [`precs_config_from_json`], with `path` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn precs_config_from_file(
    path: *const c_char,
    out: *mut *mut PrecsConfig,
) -> PrecsStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    let path = match utf8_arg(path, "path") {
        Ok(p) => p,
        Err(status) => return status,
    };
    match RunConfig::load(Path::new(path)) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(PrecsConfig { inner }));
            PrecsStatus::Ok
        }
        Err(err) => fail(&err),
    }
}

/// Release a configuration handle. NULL is a no-op.
///
/// # Safety
/// `config` must have been returned by one of the constructors and not
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn precs_config_free(config: *mut PrecsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn config_ref<'a>(config: *const PrecsConfig) -> Result<&'a RunConfig, PrecsStatus> {
    if config.is_null() {
        return Err(null_pointer("config"));
    }
    Ok(&(*config).inner)
}

/// Run the decomposition pipeline: writes `field.csv` and
/// `decompose_report.json` into the configured output directory and reports
/// the two headline numbers through the optional out-parameters.
///
/// # Safety
/// `config` must be a live handle; the out-pointers may be NULL or must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn precs_run_decompose(
    config: *const PrecsConfig,
    chi2_norm_dev: *mut f64,
    reconstruction_err: *mut f64,
) -> PrecsStatus {
    let config = match config_ref(config) {
        Ok(c) => c,
        Err(status) => return status,
    };
    match cmd_decompose(config) {
        Ok(report) => {
            if !chi2_norm_dev.is_null() {
                *chi2_norm_dev = report.chi2_norm_dev;
            }
            if !reconstruction_err.is_null() {
                *reconstruction_err = report.reconstruction_err;
            }
            PrecsStatus::Ok
        }
        Err(err) => fail(&err),
    }
}

/// Assemble the point-local operator field at time `t`: writes
/// `f_field.csv` and `lindblad_report.json`. `max_span_residual` receives
/// NaN for models without a span structure check.
///
/// # Safety
/// As for [`precs_run_decompose`].
#[no_mangle]
pub unsafe extern "C" fn precs_run_lindblad_field(
    config: *const PrecsConfig,
    t: f64,
    gksl_trace_abs: *mut f64,
    max_span_residual: *mut f64,
) -> PrecsStatus {
    let config = match config_ref(config) {
        Ok(c) => c,
        Err(status) => return status,
    };
    match cmd_lindblad_field(config, t) {
        Ok(report) => {
            if !gksl_trace_abs.is_null() {
                *gksl_trace_abs = report.gksl_trace_abs;
            }
            if !max_span_residual.is_null() {
                *max_span_residual = report.max_span_residual.unwrap_or(f64::NAN);
            }
            PrecsStatus::Ok
        }
        Err(err) => fail(&err),
    }
}

/// Integrate the dynamics with `engine` ("exact", "gksl", or "decoupled"):
/// writes the trajectory CSV and report, and, when `out` is non-NULL, hands
/// back a trajectory handle to be released with [`precs_trajectory_free`].
///
/// # Safety
/// `config` must be a live handle, `engine` NUL-terminated; `out` may be
/// NULL.
#[no_mangle]
pub unsafe extern "C" fn precs_run_evolve(
    config: *const PrecsConfig,
    engine: *const c_char,
    out: *mut *mut PrecsTrajectory,
) -> PrecsStatus {
    let config = match config_ref(config) {
        Ok(c) => c,
        Err(status) => return status,
    };
    let engine_str = match utf8_arg(engine, "engine") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let engine: Engine = match engine_str.parse() {
        Ok(e) => e,
        Err(err) => return fail(&err),
    };
    match cmd_evolve_rows(config, engine) {
        Ok((_, rows)) => {
            if !out.is_null() {
                let rows = rows.iter().map(|r| r.as_array()).collect();
                *out = Box::into_raw(Box::new(PrecsTrajectory { rows }));
            }
            PrecsStatus::Ok
        }
        Err(err) => fail(&err),
    }
}

/// Number of sampled rows in a trajectory.
///
/// # Safety
/// `traj` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn precs_trajectory_len(
    traj: *const PrecsTrajectory,
    len: *mut usize,
) -> PrecsStatus {
    if traj.is_null() {
        return null_pointer("traj");
    }
    if len.is_null() {
        return null_pointer("len");
    }
    *len = (*traj).rows.len();
    PrecsStatus::Ok
}

/// Copy row `index` into `row`: t, ρ_++, ρ_−−, Re ρ_+−, Im ρ_+−, trace_dev,
/// min_eig.
///
/// # Safety
/// `traj` must be a live handle and `row` must point to at least 7 writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn precs_trajectory_row(
    traj: *const PrecsTrajectory,
    index: usize,
    row: *mut f64,
) -> PrecsStatus {
    if traj.is_null() {
        return null_pointer("traj");
    }
    if row.is_null() {
        return null_pointer("row");
    }
    let rows = &(*traj).rows;
    if index >= rows.len() {
        set_error(&format!(
            "trajectory index {index} out of range (len {})",
            rows.len()
        ));
        return PrecsStatus::ConfigError;
    }
    std::ptr::copy_nonoverlapping(rows[index].as_ptr(), row, 7);
    PrecsStatus::Ok
}

/// Release a trajectory handle. NULL is a no-op.
///
/// # Safety
/// `traj` must have been returned by [`precs_run_evolve`] and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn precs_trajectory_free(traj: *mut PrecsTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// One-period rate curves over a coupling ladder: writes the per-coupling
/// CSVs, `fractions.csv`, and `gamma_report.json`. Pass `g_list` = NULL with
/// `g_count` = 0 for the default ladder {1,2,4,8}·ω.
///
/// # Safety
/// `config` must be a live handle; when non-NULL, `g_list` must point to
/// `g_count` readable doubles; `monotone` may be NULL or must be writable.
#[no_mangle]
pub unsafe extern "C" fn precs_run_gamma_curve(
    config: *const PrecsConfig,
    g_list: *const f64,
    g_count: usize,
    monotone: *mut bool,
) -> PrecsStatus {
    let config = match config_ref(config) {
        Ok(c) => c,
        Err(status) => return status,
    };
    let ladder: Vec<f64> = if g_list.is_null() || g_count == 0 {
        Vec::new()
    } else {
        std::slice::from_raw_parts(g_list, g_count).to_vec()
    };
    match cmd_gamma_curve(config, &ladder) {
        Ok(report) => {
            if !monotone.is_null() {
                *monotone = report.monotone;
            }
            PrecsStatus::Ok
        }
        Err(err) => fail(&err),
    }
}

/// The dephasing rate T(t) = ½ e^{−|β|²} |sin(gβ)|² of the pure-dephasing
/// model. Returns NaN (and records the error) for invalid parameters.
#[no_mangle]
pub extern "C" fn precs_dephasing_rate(omega: f64, g: f64, t: f64) -> f64 {
    match PureDephasingModel::new(omega, g) {
        Ok(model) => model.rate(t),
        Err(err) => {
            let _ = fail(&err);
            f64::NAN
        }
    }
}

/// Fraction of one period the normalized dephasing rate spends below
/// `threshold`, sampled at `samples` points.
///
/// # Safety
/// `fraction` must be writable.
#[no_mangle]
pub unsafe extern "C" fn precs_subthreshold_fraction(
    omega: f64,
    g: f64,
    threshold: f64,
    samples: usize,
    fraction: *mut f64,
) -> PrecsStatus {
    if fraction.is_null() {
        return null_pointer("fraction");
    }
    match strong_coupling_report(omega, &[g], samples, threshold) {
        Ok(rows) => {
            *fraction = rows[0].subthreshold_fraction;
            PrecsStatus::Ok
        }
        Err(err) => fail(&err),
    }
}
